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
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/quantize.hpp"

namespace procgraph {

enum class Category { cactus, tree, bridge };
enum class ForceSign { tension, compression };
enum class EdgeSemantic { deck, cable, tower };
enum class CemType { trail, deviation };
enum class VertexSemantic { deck, tower, anchor };

inline constexpr std::array<Category, 3> kAllCategories = {Category::cactus, Category::tree,
                                                          Category::bridge};

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::cactus: return "cactus";
    case Category::tree: return "tree";
    case Category::bridge: return "bridge";
  }
  return "?";
}

inline Category parse_category(std::string_view s) {
  for (const Category c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::kConfig, "unknown category '" + std::string(s) + "'");
}

struct Vertex {
  Vec3 pos;
  std::optional<double> radius;            // cactus only
  std::optional<VertexSemantic> semantic;  // bridge only

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

struct Edge {
  int a = 0;
  int b = 0;
  std::optional<ForceSign> force_sign;
  std::optional<EdgeSemantic> e_semantic;
  std::optional<CemType> cem_type;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Maps world positions to the unit cube: normalized = (world - center) / scale.
struct NormTransform {
  Vec3 center{0.0, 0.0, 0.0};
  double scale = 1.0;

  Vec3 to_unit(Vec3 world) const { return (world - center) / scale; }
  Vec3 to_world(Vec3 unit) const { return unit * scale + center; }

  friend bool operator==(const NormTransform&, const NormTransform&) = default;
};

struct ProcGraph {
  Category category = Category::cactus;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  NormTransform norm;

  friend bool operator==(const ProcGraph&, const ProcGraph&) = default;
};

struct DirectedEdge {
  int from = 0;
  int to = 0;
  int edge_index = 0;  // index into ProcGraph::edges

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

// -----------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  kDisconnectedOrEmpty,
  kCountBand,
  kSelfLoop,
  kEdgeOutOfRange,
  kDuplicateEdge,
  kCycle,
  kPositionOutOfRange,
  kRadiusOutOfRange,
  kAttributeMismatch,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kDisconnectedOrEmpty: return "disconnected-or-empty";
    case ViolationKind::kCountBand: return "count-band";
    case ViolationKind::kSelfLoop: return "self-loop";
    case ViolationKind::kEdgeOutOfRange: return "edge-out-of-range";
    case ViolationKind::kDuplicateEdge: return "duplicate-edge";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kPositionOutOfRange: return "position-out-of-range";
    case ViolationKind::kRadiusOutOfRange: return "radius-out-of-range";
    case ViolationKind::kAttributeMismatch: return "attribute-mismatch";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int index = -1;  // offending vertex/edge index, -1 for whole-graph violations

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }
};

struct ValidateOptions {
  bool check_count_band = true;
};

inline constexpr int kCactusMinVertices = 30;
inline constexpr int kCactusMaxVertices = 100;

namespace detail {

inline bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

inline std::vector<std::vector<std::pair<int, int>>> adjacency(const ProcGraph& g) {
  std::vector<std::vector<std::pair<int, int>>> adj(g.vertices.size());
  const int n = static_cast<int>(g.vertices.size());
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
    const Edge& e = g.edges[i];
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b) continue;
    adj[e.a].push_back({e.b, i});
    adj[e.b].push_back({e.a, i});
  }
  return adj;
}

inline bool connected(const ProcGraph& g) {
  if (g.vertices.empty()) return false;
  const auto adj = adjacency(g);
  std::vector<char> seen(g.vertices.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& [w, ei] : adj[u]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == g.vertices.size();
}

}  // namespace detail

/// Reports every violated ProcGraph invariant; never throws.
inline ValidationReport validate(const ProcGraph& g, ValidateOptions opts = {}) {
  ValidationReport report;
  auto add = [&report](ViolationKind k, int idx) { report.violations.push_back({k, idx}); };
  const int n = static_cast<int>(g.vertices.size());
  const bool bridge = g.category == Category::bridge;
  const bool cactus = g.category == Category::cactus;

  for (int i = 0; i < n; ++i) {
    const Vertex& v = g.vertices[i];
    if (!detail::in_unit(v.pos.x) || !detail::in_unit(v.pos.y) || !detail::in_unit(v.pos.z)) {
      add(ViolationKind::kPositionOutOfRange, i);
    }
    if (v.radius.has_value() != cactus || v.semantic.has_value() != bridge) {
      add(ViolationKind::kAttributeMismatch, i);
    }
    if (v.radius && !(*v.radius > 0.0 && *v.radius <= 0.25)) {
      add(ViolationKind::kRadiusOutOfRange, i);
    }
  }

  std::set<std::pair<int, int>> seen;
  bool structurally_sound = true;
  for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
    const Edge& e = g.edges[i];
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) {
      add(ViolationKind::kEdgeOutOfRange, i);
      structurally_sound = false;
      continue;
    }
    if (e.a == e.b) {
      add(ViolationKind::kSelfLoop, i);
      structurally_sound = false;
      continue;
    }
    if (!seen.insert(std::minmax(e.a, e.b)).second) {
      add(ViolationKind::kDuplicateEdge, i);
      structurally_sound = false;
    }
    const bool has_attrs = e.force_sign.has_value() && e.e_semantic.has_value() && e.cem_type.has_value();
    const bool any_attrs = e.force_sign.has_value() || e.e_semantic.has_value() || e.cem_type.has_value();
    if (bridge ? !has_attrs : any_attrs) add(ViolationKind::kAttributeMismatch, i);
  }

  const bool is_connected = !g.edges.empty() && detail::connected(g);
  if (!is_connected) add(ViolationKind::kDisconnectedOrEmpty, -1);

  if (!bridge && structurally_sound && is_connected && g.edges.size() + 1 != g.vertices.size()) {
    add(ViolationKind::kCycle, -1);
  }

  if (cactus && opts.check_count_band && (n < kCactusMinVertices || n > kCactusMaxVertices)) {
    add(ViolationKind::kCountBand, -1);
  }
  return report;
}

// -----------------------------------------------------------------------------
// Normalization

/// Uniformly scales positions so the longest bounding-box axis spans [0, 1]
/// and the other axes are centered. Radii are divided by the same scale. The
/// stored transform composes with any existing one, so it always maps the
/// original world coordinates.
inline ProcGraph normalize(const ProcGraph& g) {
  if (g.vertices.size() < 2) {
    throw Error(ErrorCode::kDegenerateBBox, "normalize needs at least 2 vertices");
  }
  Vec3 lo = g.vertices.front().pos;
  Vec3 hi = lo;
  for (const Vertex& v : g.vertices) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], v.pos[k]);
      hi[k] = std::max(hi[k], v.pos[k]);
    }
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (!(extent > 0.0)) throw Error(ErrorCode::kDegenerateBBox, "all vertices coincide");

  const Vec3 mid = (lo + hi) * 0.5;
  const Vec3 offset = mid - Vec3{0.5, 0.5, 0.5} * extent;
  const NormTransform step{offset, extent};

  ProcGraph out = g;
  for (Vertex& v : out.vertices) {
    v.pos = step.to_unit(v.pos);
    for (int k = 0; k < 3; ++k) v.pos[k] = std::clamp(v.pos[k], 0.0, 1.0);
    if (v.radius) *v.radius /= extent;
  }
  out.norm.center = g.norm.center + g.norm.scale * offset;
  out.norm.scale = g.norm.scale * extent;
  return out;
}

/// Maps positions and radii back to world units; the result carries an identity transform.
inline ProcGraph denormalize(const ProcGraph& g) {
  ProcGraph out = g;
  for (Vertex& v : out.vertices) {
    v.pos = g.norm.to_world(v.pos);
    if (v.radius) *v.radius *= g.norm.scale;
  }
  out.norm = NormTransform{};
  return out;
}

// -----------------------------------------------------------------------------
// Traversal

using QuantizedPos = std::array<int, 3>;

inline QuantizedPos quantized_pos(const Vertex& v) {
  return {quantize(v.pos.x), quantize(v.pos.y), quantize(v.pos.z)};
}

namespace detail {

// Neighbors of every vertex ordered by quantized position, then by vertex index.
inline std::vector<std::vector<std::pair<int, int>>> sorted_adjacency(const ProcGraph& g) {
  auto adj = adjacency(g);
  std::vector<QuantizedPos> q(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i) q[i] = quantized_pos(g.vertices[i]);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(), [&q](const auto& l, const auto& r) {
      if (q[l.first] != q[r.first]) return q[l.first] < q[r.first];
      return l.first < r.first;
    });
  }
  return adj;
}

inline void require_traversable(const ProcGraph& g) {
  const auto report = validate(g, {.check_count_band = false});
  for (const Violation& v : report.violations) {
    switch (v.kind) {
      case ViolationKind::kDisconnectedOrEmpty:
      case ViolationKind::kSelfLoop:
      case ViolationKind::kEdgeOutOfRange:
      case ViolationKind::kDuplicateEdge:
        throw Error(ErrorCode::kInvalidGraph,
                    std::string("cannot traverse: ") + std::string(to_string(v.kind)) +
                        (v.index >= 0 ? " at " + std::to_string(v.index) : std::string()));
      default:
        break;
    }
  }
}

}  // namespace detail

/// Pre-order depth-first edge list from vertex 0, edges directed parent->child.
inline std::vector<DirectedEdge> traverse_dfs(const ProcGraph& g) {
  detail::require_traversable(g);
  if (g.edges.size() + 1 != g.vertices.size()) {
    throw Error(ErrorCode::kCyclicGraph, "depth-first order needs an acyclic graph");
  }
  const auto adj = detail::sorted_adjacency(g);
  std::vector<DirectedEdge> order;
  order.reserve(g.edges.size());

  struct Frame {
    int vertex;
    int parent;
    std::size_t next = 0;
  };
  std::vector<Frame> stack{{0, -1}};
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == adj[top.vertex].size()) {
      stack.pop_back();
      continue;
    }
    const auto [child, ei] = adj[top.vertex][top.next++];
    if (child == top.parent) continue;
    order.push_back({top.vertex, child, ei});
    stack.push_back({child, top.vertex});
  }
  return order;
}

/// Breadth-first edge list from vertex 0. Tree edges are emitted when their
/// parent is dequeued; an edge closing a cycle is emitted when its second
/// endpoint is dequeued, directed from the earlier-discovered endpoint.
inline std::vector<DirectedEdge> traverse_bfs(const ProcGraph& g) {
  detail::require_traversable(g);
  const auto adj = detail::sorted_adjacency(g);
  const int n = static_cast<int>(g.vertices.size());
  std::vector<char> discovered(n, 0);
  std::vector<char> dequeued(n, 0);
  std::vector<char> emitted(g.edges.size(), 0);
  std::vector<DirectedEdge> order;
  order.reserve(g.edges.size());

  std::queue<int> frontier;
  frontier.push(0);
  discovered[0] = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    dequeued[u] = 1;
    for (const auto& [w, ei] : adj[u]) {
      if (emitted[ei]) continue;
      if (!discovered[w]) {
        discovered[w] = 1;
        frontier.push(w);
        order.push_back({u, w, ei});
        emitted[ei] = 1;
      } else if (dequeued[w]) {
        order.push_back({w, u, ei});
        emitted[ei] = 1;
      }
    }
  }
  return order;
}

}  // namespace procgraph
