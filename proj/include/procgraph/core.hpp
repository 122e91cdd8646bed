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

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace procgraph {

enum class ErrorCode {
  kDegenerateBBox,
  kCyclicGraph,
  kInvalidGraph,
  kMalformedSequence,
  kOutOfRange,
  kBandUnreachable,
  kEmptyTarget,
  kDimensionMismatch,
  kMixedSchema,
  kSchemaMismatch,
  kEmptyGeometry,
  kEmptySet,
  kFormat,
  kIo,
  kConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateBBox: return "degenerate-bbox";
    case ErrorCode::kCyclicGraph: return "cyclic-graph";
    case ErrorCode::kInvalidGraph: return "invalid-graph";
    case ErrorCode::kMalformedSequence: return "malformed-structure";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kBandUnreachable: return "band-unreachable";
    case ErrorCode::kEmptyTarget: return "empty-target";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kMixedSchema: return "mixed-schema";
    case ErrorCode::kSchemaMismatch: return "schema-mismatch";
    case ErrorCode::kEmptyGeometry: return "empty-geometry";
    case ErrorCode::kEmptySet: return "empty-set";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

/// Library error; `code()` tells callers which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;
};

inline constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec3{0.0, 1.0, 0.0};
}

/// Unit vectors u, v with (u, v, axis) orthonormal.
inline std::array<Vec3, 2> orthonormal_basis(Vec3 axis) {
  const Vec3 w = normalized(axis);
  const Vec3 helper = std::abs(w.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 u = normalized(cross(w, helper));
  return {u, cross(w, u)};
}

inline constexpr double kPi = 3.14159265358979323846;

// -----------------------------------------------------------------------------
// Counter-based RNG. Output i of a stream is a pure function of (key, i), so
// results never depend on the platform's <random> implementation.

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key = 0) : key_(mix64(key ^ 0x6A09E667F3BCC908ULL)) {}

  /// Stream keyed by a seed and any number of sub-stream ids.
  static constexpr CounterRng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t key = mix64(seed + 0x9E3779B97F4A7C15ULL);
    for (const std::uint64_t id : ids) key = mix64(key ^ mix64(id + 0xD1B54A32D192ED03ULL));
    return CounterRng(key);
  }

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] (inclusive), unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1ULL;
    if (range == 0) return static_cast<std::int64_t>(next_u64());
    const std::uint64_t limit = (~std::uint64_t{0} / range) * range;
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return lo + static_cast<std::int64_t>(draw % range);
  }

  constexpr bool bernoulli(double p) { return uniform() < p; }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace procgraph
