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
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/graph.hpp"

namespace procgraph {

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Growth parameters shared by the cactus and tree generators.
struct PlantParams {
  IntRange trunk_segments;
  double branch_prob = 0.0;
  int max_depth = 0;
  double radius0 = 0.06;
  double radius_decay = 0.7;
  double segment_len = 0.09;
  double up_bias = 0.5;
  double jitter_deg = 30.0;
};

struct BridgeParams {
  IntRange deck_nodes{16, 30};
  int tower_count = 2;
  double tower_height = 0.5;
  double deck_y = 0.15;
};

struct GenParams {
  std::uint64_t seed = 0;
  Category category = Category::cactus;
  PlantParams cactus{{4, 10}, 0.25, 3, 0.06, 0.7, 0.09, 0.6, 30.0};
  PlantParams tree{{5, 12}, 0.35, 4, 0.06, 0.7, 0.07, 0.45, 40.0};
  BridgeParams bridge;
  IntRange vertex_band{30, 100};

  static IntRange default_band(Category c) {
    switch (c) {
      case Category::cactus: return {30, 100};
      case Category::tree: return {50, 400};
      case Category::bridge: return {20, 140};
    }
    return {0, 0};
  }

  static GenParams defaults(Category c, std::uint64_t seed) {
    GenParams p;
    p.seed = seed;
    p.category = c;
    p.vertex_band = default_band(c);
    return p;
  }

  void check() const {
    auto bad = [](const std::string& what) { throw Error(ErrorCode::kConfig, "GenParams: " + what); };
    for (const PlantParams* pp : {&cactus, &tree}) {
      if (pp->branch_prob < 0.0 || pp->branch_prob > 1.0) bad("branch_prob outside [0,1]");
      if (pp->up_bias < 0.0 || pp->up_bias > 1.0) bad("up_bias outside [0,1]");
      if (!(pp->segment_len > 0.0) || !(pp->radius0 > 0.0) || !(pp->radius_decay > 0.0)) bad("lengths must be positive");
      if (pp->trunk_segments.lo < 1 || pp->trunk_segments.hi < pp->trunk_segments.lo) bad("trunk_segments");
      if (pp->max_depth < 0) bad("max_depth");
    }
    if (bridge.deck_nodes.lo < 2 || bridge.deck_nodes.hi < bridge.deck_nodes.lo) bad("deck_nodes");
    if (bridge.tower_count < 1 || !(bridge.tower_height > 0.0)) bad("towers");
    if (vertex_band.lo < 1 || vertex_band.hi < vertex_band.lo) bad("vertex_band");
  }
};

/// Tapered cylinder (frustum) in normalized units.
struct Cylinder {
  Vec3 p0;
  Vec3 p1;
  double r0 = 0.0;
  double r1 = 0.0;
};

inline constexpr double kDefaultRadius = 0.008;
inline constexpr int kMaxGenerationAttempts = 32;

namespace detail {

inline Vec3 rotate(Vec3 v, Vec3 axis, double angle) {
  const Vec3 k = normalized(axis);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + cross(k, v) * s + k * (dot(k, v) * (1.0 - c));
}

// Rotation of `dir` by `angle` about a random axis perpendicular to it.
inline Vec3 tilt(Vec3 dir, double angle, CounterRng& rng) {
  const auto [u, v] = orthonormal_basis(dir);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  return normalized(rotate(dir, u * std::cos(phi) + v * std::sin(phi), angle));
}

inline bool distinct_cells(const ProcGraph& g) {
  std::set<QuantizedPos> cells;
  for (const Vertex& v : g.vertices) {
    if (!cells.insert(quantized_pos(v)).second) return false;
  }
  return true;
}

inline constexpr Vec3 kUp{0.0, 1.0, 0.0};

// One attempt of recursive segment extension. Branch i draws from its own
// sub-stream (seed, attempt, i).
inline ProcGraph grow_plant(const GenParams& params, const PlantParams& pp, bool with_radius, int attempt) {
  struct Branch {
    int start;
    Vec3 dir;
    int depth;
    int segments;
    double radius;
  };
  const double jitter = pp.jitter_deg * kPi / 180.0;

  ProcGraph g;
  g.category = params.category;
  auto add_vertex = [&](Vec3 pos, double radius) {
    Vertex v{pos, std::nullopt, std::nullopt};
    if (with_radius) v.radius = radius;
    g.vertices.push_back(v);
    return static_cast<int>(g.vertices.size()) - 1;
  };

  CounterRng root_rng = CounterRng::derive(params.seed, {static_cast<std::uint64_t>(attempt), 0xC0FFEE});
  const int trunk = static_cast<int>(root_rng.uniform_int(pp.trunk_segments.lo, pp.trunk_segments.hi));
  add_vertex({0.0, 0.0, 0.0}, pp.radius0);

  std::deque<Branch> pending{{0, kUp, 0, trunk, pp.radius0}};
  std::uint64_t branch_index = 0;
  while (!pending.empty()) {
    const Branch b = pending.front();
    pending.pop_front();
    CounterRng rng = CounterRng::derive(params.seed, {static_cast<std::uint64_t>(attempt), branch_index++});
    int prev = b.start;
    Vec3 dir = b.dir;
    for (int s = 0; s < b.segments; ++s) {
      if (s > 0 || b.depth == 0) {
        dir = tilt(dir, rng.uniform(0.0, jitter), rng);
        dir = normalized(dir * (1.0 - pp.up_bias) + kUp * pp.up_bias);
      }
      const double len = pp.segment_len * rng.uniform(0.85, 1.15);
      const int v = add_vertex(g.vertices[prev].pos + dir * len, b.radius);
      g.edges.push_back({prev, v, {}, {}, {}});
      prev = v;
      if (b.depth < pp.max_depth && rng.bernoulli(pp.branch_prob)) {
        const Vec3 spawn = tilt(dir, rng.uniform(kPi / 4.0, kPi / 2.0), rng);
        const double shrink = std::pow(0.8, b.depth + 1);
        const int lo = std::max(2, static_cast<int>(std::lround(pp.trunk_segments.lo * shrink)));
        const int hi = std::max(lo, static_cast<int>(std::lround(pp.trunk_segments.hi * shrink)));
        pending.push_back({v, spawn, b.depth + 1, static_cast<int>(rng.uniform_int(lo, hi)),
                           b.radius * pp.radius_decay});
      }
    }
  }
  return g;
}

inline ProcGraph generate_with_band(const GenParams& params, const PlantParams& pp, bool with_radius) {
  params.check();
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    ProcGraph raw = grow_plant(params, pp, with_radius, attempt);
    const int n = static_cast<int>(raw.vertices.size());
    if (n < params.vertex_band.lo || n > params.vertex_band.hi) continue;
    ProcGraph g = normalize(raw);
    if (!distinct_cells(g)) continue;
    return g;
  }
  throw Error(ErrorCode::kBandUnreachable,
              "no graph within [" + std::to_string(params.vertex_band.lo) + "," +
                  std::to_string(params.vertex_band.hi) + "] vertices after " +
                  std::to_string(kMaxGenerationAttempts) + " attempts (seed " + std::to_string(params.seed) + ")");
}

}  // namespace detail

/// Rooted cactus skeleton with per-vertex radius, normalized to the unit cube.
inline ProcGraph gen_cactus(const GenParams& params) {
  if (params.category != Category::cactus) throw Error(ErrorCode::kConfig, "gen_cactus needs category cactus");
  return detail::generate_with_band(params, params.cactus, true);
}

/// Rooted tree skeleton (positions only), normalized to the unit cube.
inline ProcGraph gen_tree(const GenParams& params) {
  if (params.category != Category::tree) throw Error(ErrorCode::kConfig, "gen_tree needs category tree");
  return detail::generate_with_band(params, params.tree, false);
}

/// Simplified suspension bridge: a deck polyline, towers standing on ground
/// anchors at the deck quartile points, and cables from every tower top to
/// every deck vertex. Vertex 0 is the deck origin.
inline ProcGraph gen_bridge(const GenParams& params) {
  if (params.category != Category::bridge) throw Error(ErrorCode::kConfig, "gen_bridge needs category bridge");
  params.check();
  const BridgeParams& bp = params.bridge;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    CounterRng rng = CounterRng::derive(params.seed, {static_cast<std::uint64_t>(attempt), 0xB41D6E});
    const int deck = static_cast<int>(rng.uniform_int(bp.deck_nodes.lo, bp.deck_nodes.hi));
    const int n = deck + 2 * bp.tower_count;
    if (n < params.vertex_band.lo || n > params.vertex_band.hi) continue;

    const double arch = rng.uniform(0.0, 0.05);
    const double z = 0.5;
    ProcGraph g;
    g.category = Category::bridge;
    for (int i = 0; i < deck; ++i) {
      const double t = static_cast<double>(i) / (deck - 1);
      g.vertices.push_back({{t, bp.deck_y + arch * std::sin(kPi * t), z}, std::nullopt, VertexSemantic::deck});
    }
    for (int i = 0; i + 1 < deck; ++i) {
      g.edges.push_back({i, i + 1, ForceSign::compression, EdgeSemantic::deck, CemType::trail});
    }
    for (int k = 0; k < bp.tower_count; ++k) {
      const double x = (2.0 * k + 1.0) / (2.0 * bp.tower_count) + rng.uniform(-0.02, 0.02);
      const double height = bp.tower_height * rng.uniform(0.8, 1.2);
      const int top = static_cast<int>(g.vertices.size());
      g.vertices.push_back({{x, bp.deck_y + height, z}, std::nullopt, VertexSemantic::tower});
      const int anchor = top + 1;
      g.vertices.push_back({{x, 0.0, z}, std::nullopt, VertexSemantic::anchor});
      g.edges.push_back({anchor, top, ForceSign::compression, EdgeSemantic::tower, CemType::trail});
      for (int i = 0; i < deck; ++i) {
        g.edges.push_back({top, i, ForceSign::tension, EdgeSemantic::cable, CemType::deviation});
      }
    }
    ProcGraph out = normalize(g);
    if (!detail::distinct_cells(out)) continue;
    return out;
  }
  throw Error(ErrorCode::kBandUnreachable, "bridge vertex band unreachable (seed " + std::to_string(params.seed) + ")");
}

inline ProcGraph generate(const GenParams& params) {
  switch (params.category) {
    case Category::cactus: return gen_cactus(params);
    case Category::tree: return gen_tree(params);
    case Category::bridge: return gen_bridge(params);
  }
  throw Error(ErrorCode::kConfig, "unknown category");
}

/// One cylinder per edge, in edge order; radius-free vertices use `default_radius`.
inline std::vector<Cylinder> graph_to_cylinders(const ProcGraph& g, double default_radius = kDefaultRadius) {
  std::vector<Cylinder> out;
  out.reserve(g.edges.size());
  for (const Edge& e : g.edges) {
    const Vertex& a = g.vertices.at(e.a);
    const Vertex& b = g.vertices.at(e.b);
    out.push_back({a.pos, b.pos, a.radius.value_or(default_radius), b.radius.value_or(default_radius)});
  }
  return out;
}

// -----------------------------------------------------------------------------
// Mesh export

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;  // zero-based
};

/// Tessellates each cylinder as a closed frustum: two rings of `sides`
/// vertices plus two cap centers, side quads split in two, caps as fans.
inline TriMesh export_mesh(const std::vector<Cylinder>& cyls, int sides = 16) {
  if (sides < 3) throw Error(ErrorCode::kConfig, "export_mesh needs sides >= 3");
  TriMesh mesh;
  for (const Cylinder& c : cyls) {
    const int base = static_cast<int>(mesh.vertices.size());
    const auto [u, v] = orthonormal_basis(c.p1 - c.p0);
    for (int ring = 0; ring < 2; ++ring) {
      const Vec3 center = ring == 0 ? c.p0 : c.p1;
      const double r = ring == 0 ? c.r0 : c.r1;
      for (int i = 0; i < sides; ++i) {
        const double a = 2.0 * kPi * i / sides;
        mesh.vertices.push_back(center + (u * std::cos(a) + v * std::sin(a)) * r);
      }
    }
    const int cap0 = base + 2 * sides;
    const int cap1 = cap0 + 1;
    mesh.vertices.push_back(c.p0);
    mesh.vertices.push_back(c.p1);
    for (int i = 0; i < sides; ++i) {
      const int j = (i + 1) % sides;
      const int a0 = base + i, a1 = base + j;
      const int b0 = base + sides + i, b1 = base + sides + j;
      mesh.faces.push_back({a0, a1, b1});
      mesh.faces.push_back({a0, b1, b0});
      mesh.faces.push_back({cap0, a1, a0});
      mesh.faces.push_back({cap1, b0, b1});
    }
  }
  return mesh;
}

/// `v x y z` and 1-based `f i j k` records.
inline void write_obj(std::ostream& out, const TriMesh& mesh) {
  std::ostringstream line;
  line.precision(9);
  for (const Vec3& p : mesh.vertices) line << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const auto& f : mesh.faces) line << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  out << line.str();
}

}  // namespace procgraph
