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

#include "test_util.hpp"

namespace procgraph {
namespace {

using testing::error_code_of;
using testing::tree_graph;

double brute_chamfer(const PointSet& a, const PointSet& b) {
  auto directed = [](const PointSet& from, const PointSet& to) {
    double sum = 0.0;
    for (const Vec3& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to.points) best = std::min(best, norm(p - q));
      sum += best;
    }
    return sum / static_cast<double>(from.points.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

PointSet random_points(CounterRng& rng, int n, bool clustered) {
  PointSet s;
  const Vec3 center{rng.uniform(), rng.uniform(), rng.uniform()};
  for (int i = 0; i < n; ++i) {
    if (clustered) {
      // Coarse lattice: many exact ties and duplicates.
      s.points.push_back(center + Vec3{std::floor(rng.uniform(0, 4)), std::floor(rng.uniform(0, 4)), 0.0} * 0.25);
    } else {
      s.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    }
  }
  return s;
}

TEST(Chamfer, HandValues) {
  const PointSet a{{{0, 0, 0}}};
  const PointSet b{{{1, 0, 0}}};
  EXPECT_DOUBLE_EQ(chamfer(a, b), 1.0);
  EXPECT_EQ(chamfer(a, a), 0.0);
  // A = {0, 2} on x, B = {0}: A->B mean 1, B->A mean 0.
  const PointSet two{{{0, 0, 0}, {2, 0, 0}}};
  EXPECT_DOUBLE_EQ(chamfer(two, a), 0.5);
  EXPECT_EQ(error_code_of([&] { chamfer(PointSet{}, a); }), ErrorCode::kEmptySet);
}

TEST(Chamfer, MatchesBruteForce) {
  CounterRng rng = CounterRng::derive(51, {});
  for (int i = 0; i < 100; ++i) {
    const int n = static_cast<int>(rng.uniform_int(1, i < 10 ? 2000 : 300));
    const int m = static_cast<int>(rng.uniform_int(1, i < 10 ? 2000 : 300));
    const PointSet a = random_points(rng, n, i % 3 == 0);
    const PointSet b = random_points(rng, m, i % 5 == 0);
    const double fast = chamfer(a, b);
    EXPECT_NEAR(fast, brute_chamfer(a, b), 1e-12) << "pair " << i;
    EXPECT_EQ(fast, chamfer(b, a));
    EXPECT_GE(fast, 0.0);
  }
}

TEST(Chamfer, ZeroOnlyForEqualSets) {
  CounterRng rng(52);
  PointSet a = random_points(rng, 50, false);
  PointSet shuffled = a;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  shuffled.points.push_back(a.points[3]);
  EXPECT_EQ(chamfer(a, shuffled), 0.0);
  shuffled.points.push_back({5, 5, 5});
  EXPECT_GT(chamfer(a, shuffled), 0.0);
}

TEST(Surface, PointsLieOnFrustum) {
  CounterRng rng(53);
  const std::vector<Cylinder> cyls{{{0, 0, 0}, {0, 0, 1}, 0.2, 0.05}, {{0.2, 0.3, 0.1}, {0.9, 0.4, 0.5}, 0.03, 0.03}};
  const PointSet s = sample_surface_points(cyls, 4096, rng);
  ASSERT_EQ(s.points.size(), 4096u);
  for (const Vec3& p : s.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cylinder& c : cyls) {
      const Vec3 axis = c.p1 - c.p0;
      const double t = dot(p - c.p0, axis) / dot(axis, axis);
      if (t < -1e-12 || t > 1 + 1e-12) continue;
      const double r = c.r0 + t * (c.r1 - c.r0);
      best = std::min(best, std::abs(norm(p - (c.p0 + axis * t)) - r));
    }
    EXPECT_LT(best, 1e-12);
  }
  CounterRng again(53);
  const PointSet s2 = sample_surface_points(cyls, 4096, again);
  EXPECT_TRUE(std::equal(s.points.begin(), s.points.end(), s2.points.begin(),
                         [](const Vec3& x, const Vec3& y) { return x.x == y.x && x.y == y.y && x.z == y.z; }));
}

TEST(Surface, AreaWeightingAndAxialUniformity) {
  CounterRng rng(54);
  const std::vector<Cylinder> twins{{{0, 0, 0}, {1, 0, 0}, 0.1, 0.1}, {{0, 2, 0}, {1, 2, 0}, 0.1, 0.1}};
  const int n = 4096;
  const PointSet s = sample_surface_points(twins, n, rng);
  int first = 0, low_half = 0;
  for (const Vec3& p : s.points) {
    first += p.y < 1.0;
    low_half += p.x < 0.5;
  }
  const double sigma = std::sqrt(n * 0.25);
  EXPECT_LE(std::abs(first - n / 2), 3 * sigma);
  EXPECT_LE(std::abs(low_half - n / 2), 3 * sigma);

  // Lateral areas 1 : 3 (radius triples).
  const std::vector<Cylinder> uneven{{{0, 0, 0}, {1, 0, 0}, 0.1, 0.1}, {{0, 2, 0}, {1, 2, 0}, 0.3, 0.3}};
  const PointSet u = sample_surface_points(uneven, n, rng);
  int thin = 0;
  for (const Vec3& p : u.points) thin += p.y < 1.0;
  EXPECT_LE(std::abs(thin - n / 4), 3 * std::sqrt(n * 0.25 * 0.75));

  EXPECT_EQ(error_code_of([&] { sample_surface_points({}, 10, rng); }), ErrorCode::kEmptyGeometry);
  EXPECT_EQ(error_code_of([&] { sample_surface_points(twins, 0, rng); }), ErrorCode::kConfig);
}

TEST(MaskOverlap, Counts) {
  SilhouetteMask a(20, 20), b(20, 20);
  for (int i = 0; i < 100; ++i) a.bits[i] = 1;
  for (int i = 50; i < 250; ++i) b.bits[i] = 1;
  const MaskOverlap m = mask_overlap(a, b);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 0.25);
  EXPECT_DOUBLE_EQ(m.iou, 0.2);

  const MaskOverlap same = mask_overlap(a, a);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.iou, 1.0);

  SilhouetteMask c(20, 20);
  c.bits[399] = 1;
  const MaskOverlap dis = mask_overlap(a, c);
  EXPECT_EQ(dis.precision + dis.recall + dis.iou, 0.0);
  const MaskOverlap empty = mask_overlap(SilhouetteMask(20, 20), SilhouetteMask(20, 20));
  EXPECT_EQ(empty.precision + empty.recall + empty.iou, 0.0);
  EXPECT_EQ(error_code_of([&] { mask_overlap(a, SilhouetteMask(20, 21)); }), ErrorCode::kDimensionMismatch);
}

TEST(TopoSim, HandValues) {
  const ProcGraph edge = tree_graph({{0, 0, 0}, {1, 0, 0}}, {{0, 1}});
  ProcGraph triangle = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  triangle.category = Category::bridge;
  EXPECT_EQ(topo_sim(edge, triangle), 0.0);
  EXPECT_EQ(topo_sim(edge, edge), 1.0);

  // Path of 3 {1: 2/3, 2: 1/3} vs star of 4 {1: 3/4, 3: 1/4}: 2/3 * 3/4.
  const ProcGraph path = tree_graph({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1}, {1, 2}});
  const ProcGraph star = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1}, {0, 2}, {0, 3}});
  EXPECT_DOUBLE_EQ(topo_sim(path, star), 0.5);
  EXPECT_EQ(topo_sim(star, path), topo_sim(path, star));
}

TEST(TopoSim, RangeAndSymmetryOnGenerated) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const ProcGraph a = generate(GenParams::defaults(kAllCategories[s % 3], s));
    const ProcGraph b = generate(GenParams::defaults(kAllCategories[(s / 3) % 3], s + 100));
    const double v = topo_sim(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v, topo_sim(b, a));
    EXPECT_EQ(topo_sim(a, a), 1.0);
  }
}

TEST(Metrics, RewardIsOverlapMix) {
  CounterRng rng(55);
  for (int i = 0; i < 200; ++i) {
    const ProcGraph g = generate(GenParams::defaults(Category::cactus, static_cast<std::uint64_t>(i)));
    const ProcGraph h = generate(GenParams::defaults(Category::cactus, static_cast<std::uint64_t>(i) + 1));
    const SilhouetteMask a = render_graph(g), b = render_graph(h);
    const double lambda = rng.uniform();
    const MaskOverlap m = mask_overlap(a, b);
    EXPECT_EQ(reward(a, b, lambda), lambda * m.precision + (1 - lambda) * m.recall);
  }
}

}  // namespace
}  // namespace procgraph
