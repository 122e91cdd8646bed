// Copyright 2026 The procgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/generators.hpp"

namespace procgraph {

/// Orthographic front view looking down -z: world x maps to image columns
/// (rightward), world y to rows (upward). Square pixels over a fixed window.
struct Camera {
  double x_min = -0.1;
  double y_min = -0.1;
  double extent = 1.2;  // window side length in world units
  int width = 256;
  int height = 256;

  double pixels_per_unit() const { return width / extent; }
  double pixel_x(int col) const { return x_min + (col + 0.5) * extent / width; }
  double pixel_y(int row) const { return y_min + extent - (row + 0.5) * extent / height; }
};

struct SilhouetteMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  SilhouetteMask() = default;
  SilhouetteMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}
  explicit SilhouetteMask(const Camera& cam) : SilhouetteMask(cam.width, cam.height) {}

  bool at(int col, int row) const { return bits[static_cast<std::size_t>(row) * width + col] != 0; }
  void set(int col, int row) { bits[static_cast<std::size_t>(row) * width + col] = 1; }

  std::size_t count() const {
    std::size_t n = 0;
    for (const std::uint8_t b : bits) n += b;
    return n;
  }

  friend bool operator==(const SilhouetteMask&, const SilhouetteMask&) = default;
};

/// Sets every pixel whose center lies inside the projected tapered capsule.
inline void rasterize_cylinder(SilhouetteMask& mask, const Cylinder& c, const Camera& cam) {
  const double ax = c.p0.x, ay = c.p0.y;
  const double dx = c.p1.x - ax, dy = c.p1.y - ay;
  const double len2 = dx * dx + dy * dy;
  const double rmax = std::max(c.r0, c.r1);
  const double ppu = cam.pixels_per_unit();

  const double x_lo = std::min(ax, ax + dx) - rmax, x_hi = std::max(ax, ax + dx) + rmax;
  const double y_lo = std::min(ay, ay + dy) - rmax, y_hi = std::max(ay, ay + dy) + rmax;
  const int col0 = std::max(0, static_cast<int>(std::floor((x_lo - cam.x_min) * ppu - 0.5)));
  const int col1 = std::min(mask.width - 1, static_cast<int>(std::ceil((x_hi - cam.x_min) * ppu - 0.5)));
  const double top = cam.y_min + cam.extent;
  const int row0 = std::max(0, static_cast<int>(std::floor((top - y_hi) * ppu - 0.5)));
  const int row1 = std::min(mask.height - 1, static_cast<int>(std::ceil((top - y_lo) * ppu - 0.5)));

  for (int row = row0; row <= row1; ++row) {
    const double py = cam.pixel_y(row);
    for (int col = col0; col <= col1; ++col) {
      const double px = cam.pixel_x(col);
      double t = 0.0;
      double r = rmax;
      if (len2 > 0.0) {
        t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
        r = c.r0 + t * (c.r1 - c.r0);
      }
      const double ex = px - (ax + t * dx);
      const double ey = py - (ay + t * dy);
      if (ex * ex + ey * ey <= r * r) mask.set(col, row);
    }
  }
}

inline SilhouetteMask render_mask(const std::vector<Cylinder>& cyls, const Camera& cam = {}) {
  SilhouetteMask mask(cam);
  for (const Cylinder& c : cyls) rasterize_cylinder(mask, c, cam);
  return mask;
}

inline SilhouetteMask render_graph(const ProcGraph& g, const Camera& cam = {}) {
  return render_mask(graph_to_cylinders(g), cam);
}

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
};

inline OverlapCounts overlap_counts(const SilhouetteMask& a, const SilhouetteMask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                                                   std::to_string(b.width) + "x" + std::to_string(b.height));
  }
  OverlapCounts c;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    c.size_a += a.bits[i];
    c.size_b += b.bits[i];
    c.intersection += a.bits[i] & b.bits[i];
  }
  return c;
}

/// lambda * |I & G| / |G| + (1 - lambda) * |I & G| / |I|, with the first
/// ratio taken as 0 when the rendered mask is empty.
inline double reward(const SilhouetteMask& rendered, const SilhouetteMask& target, double lambda = 0.5) {
  const OverlapCounts c = overlap_counts(rendered, target);
  if (c.size_b == 0) throw Error(ErrorCode::kEmptyTarget, "target mask has no foreground");
  const double inter = static_cast<double>(c.intersection);
  const double precision = c.size_a == 0 ? 0.0 : inter / static_cast<double>(c.size_a);
  const double recall = inter / static_cast<double>(c.size_b);
  return lambda * precision + (1.0 - lambda) * recall;
}

// -----------------------------------------------------------------------------
// Binary PGM (P5)

inline std::string mask_to_pgm(const SilhouetteMask& m) {
  std::string out = "P5\n" + std::to_string(m.width) + " " + std::to_string(m.height) + "\n255\n";
  out.reserve(out.size() + m.bits.size());
  for (const std::uint8_t b : m.bits) out.push_back(static_cast<char>(b ? 255 : 0));
  return out;
}

/// Parses P5 data; samples >= 128 (on a 0..255 scale) are foreground.
inline SilhouetteMask mask_from_pgm(const std::string& data) {
  std::size_t pos = 0;
  auto fail = [](const std::string& what) -> void { throw Error(ErrorCode::kFormat, "PGM: " + what); };
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) fail("bad header");
    return std::stol(data.substr(start, pos - start));
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') fail("not a binary PGM (P5)");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) fail("bad dimensions or maxval");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) fail("bad header terminator");
  ++pos;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * bytes_per;
  if (data.size() - pos < need) fail("truncated raster");
  SilhouetteMask m(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    long v = static_cast<unsigned char>(data[pos + i * bytes_per]);
    if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * 2 + 1]);
    m.bits[i] = v * 255 >= 128 * maxval ? 1 : 0;
  }
  return m;
}

inline void save_mask(const std::string& path, const SilhouetteMask& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  const std::string data = mask_to_pgm(m);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline SilhouetteMask load_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return mask_from_pgm(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace procgraph
