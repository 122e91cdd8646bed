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
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/generators.hpp"
#include "procgraph/graph.hpp"
#include "procgraph/raster.hpp"

namespace procgraph {

struct PointSet {
  std::vector<Vec3> points;
};

/// Points on the lateral frustum surfaces; cylinders are chosen in
/// proportion to lateral area, then axial parameter and angle are uniform.
inline PointSet sample_surface_points(const std::vector<Cylinder>& cyls, int n, CounterRng& rng) {
  if (cyls.empty()) throw Error(ErrorCode::kEmptyGeometry, "no cylinders to sample");
  if (n < 1) throw Error(ErrorCode::kConfig, "sample count must be >= 1");
  std::vector<double> cumulative;
  cumulative.reserve(cyls.size());
  double total = 0.0;
  for (const Cylinder& c : cyls) {
    const double h = norm(c.p1 - c.p0);
    const double slant = std::sqrt(h * h + (c.r1 - c.r0) * (c.r1 - c.r0));
    total += kPi * (c.r0 + c.r1) * slant;
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptyGeometry, "cylinders have zero lateral area");

  PointSet out;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const Cylinder& c = cyls[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cyls.size() - 1)];
    const double t = rng.uniform();
    const double angle = rng.uniform(0.0, 2.0 * kPi);
    const auto [u, v] = orthonormal_basis(c.p1 - c.p0);
    const double r = c.r0 + t * (c.r1 - c.r0);
    out.points.push_back(c.p0 + (c.p1 - c.p0) * t + (u * std::cos(angle) + v * std::sin(angle)) * r);
  }
  return out;
}

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Exact nearest-neighbour queries over a static point set.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points), index_(points.size()) {
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(points.size());
    if (!index_.empty()) build(0, index_.size(), 0);
  }

  /// Squared distance to the closest stored point.
  double nearest_squared(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) search(0, q, best);
    return best;
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(lo), index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({index_[mid], axis, -1, -1});
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid + 1, hi, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(int id, const Vec3& q, double& best) const {
    const Node& node = nodes_[id];
    const Vec3& p = points_[node.point];
    best = std::min(best, squared_distance(q, p));
    const double diff = q[node.axis] - p[node.axis];
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    if (near >= 0) search(near, q, best);
    if (far >= 0 && diff * diff <= best) search(far, q, best);
  }

  const std::vector<Vec3>& points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
};

/// Half the sum of the two directed mean nearest-neighbour distances.
inline double chamfer(const PointSet& a, const PointSet& b) {
  if (a.points.empty() || b.points.empty()) throw Error(ErrorCode::kEmptySet, "chamfer needs non-empty point sets");
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  double sum_ab = 0.0;
  for (const Vec3& p : a.points) sum_ab += std::sqrt(tree_b.nearest_squared(p));
  double sum_ba = 0.0;
  for (const Vec3& p : b.points) sum_ba += std::sqrt(tree_a.nearest_squared(p));
  return 0.5 * (sum_ab / static_cast<double>(a.points.size()) + sum_ba / static_cast<double>(b.points.size()));
}

struct MaskOverlap {
  double precision = 0.0;
  double recall = 0.0;
  double iou = 0.0;
};

/// precision = |A & B| / |A|, recall = |A & B| / |B|, iou = |A & B| / |A | B|; 0/0 is 0.
inline MaskOverlap mask_overlap(const SilhouetteMask& a, const SilhouetteMask& b) {
  const OverlapCounts c = overlap_counts(a, b);
  const double inter = static_cast<double>(c.intersection);
  const double uni = static_cast<double>(c.size_a + c.size_b - c.intersection);
  MaskOverlap m;
  m.precision = c.size_a == 0 ? 0.0 : inter / static_cast<double>(c.size_a);
  m.recall = c.size_b == 0 ? 0.0 : inter / static_cast<double>(c.size_b);
  m.iou = uni == 0.0 ? 0.0 : inter / uni;
  return m;
}

/// Topology proxy: intersection of the normalized vertex-degree histograms,
/// scaled by the vertex-count ratio min/max.
inline double topo_sim(const ProcGraph& g1, const ProcGraph& g2) {
  if (g1.vertices.empty() || g2.vertices.empty()) return 0.0;
  auto histogram = [](const ProcGraph& g) {
    std::vector<int> degree(g.vertices.size(), 0);
    for (const Edge& e : g.edges) {
      ++degree.at(e.a);
      ++degree.at(e.b);
    }
    std::map<int, std::int64_t> h;
    for (const int d : degree) ++h[d];
    return h;
  };
  // Sum of min(c1/n1, c2/n2) evaluated on the common denominator n1*n2.
  const auto h1 = histogram(g1);
  const auto h2 = histogram(g2);
  const auto n1 = static_cast<std::int64_t>(g1.vertices.size());
  const auto n2 = static_cast<std::int64_t>(g2.vertices.size());
  std::int64_t inter = 0;
  for (const auto& [d, c1] : h1) {
    if (const auto it = h2.find(d); it != h2.end()) inter += std::min(c1 * n2, it->second * n1);
  }
  const double hist = static_cast<double>(inter) / static_cast<double>(n1 * n2);
  return hist * static_cast<double>(std::min(n1, n2)) / static_cast<double>(std::max(n1, n2));
}

}  // namespace procgraph
