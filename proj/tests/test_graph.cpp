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

#include <algorithm>
#include <set>

#include "test_util.hpp"

namespace procgraph {
namespace {

using testing::error_code_of;
using testing::tree_graph;

TEST(Validate, SingleVertexCactusIsDisconnectedAndOutOfBand) {
  ProcGraph g;
  g.category = Category::cactus;
  g.vertices.push_back(Vertex{{0.5, 0.5, 0.5}, 0.05, std::nullopt});
  const auto r = validate(g);
  ASSERT_EQ(r.violations.size(), 2u);
  EXPECT_TRUE(r.has(ViolationKind::kDisconnectedOrEmpty));
  EXPECT_TRUE(r.has(ViolationKind::kCountBand));
}

TEST(Validate, TwoVertexTreeIsValid) {
  const auto g = tree_graph({{0, 0, 0}, {1, 1, 1}}, {{0, 1}});
  EXPECT_TRUE(validate(g).ok());
}

TEST(Validate, SelfLoopReportedWithIndex) {
  auto g = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 3}});
  const auto r = validate(g);
  ASSERT_TRUE(r.has(ViolationKind::kSelfLoop));
  const auto it = std::find_if(r.violations.begin(), r.violations.end(),
                               [](const Violation& v) { return v.kind == ViolationKind::kSelfLoop; });
  EXPECT_EQ(it->index, 3);
}

TEST(Validate, ReportsEachInvariant) {
  auto dup = tree_graph({{0, 0, 0}, {1, 0, 0}}, {{0, 1}, {1, 0}});
  EXPECT_TRUE(validate(dup).has(ViolationKind::kDuplicateEdge));

  auto range = tree_graph({{0, 0, 0}, {1, 0, 0}}, {{0, 2}});
  EXPECT_TRUE(validate(range).has(ViolationKind::kEdgeOutOfRange));

  auto cyc = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_TRUE(validate(cyc).has(ViolationKind::kCycle));
  cyc.category = Category::bridge;
  for (Edge& e : cyc.edges) {
    e.force_sign = ForceSign::tension;
    e.e_semantic = EdgeSemantic::cable;
    e.cem_type = CemType::trail;
  }
  for (Vertex& v : cyc.vertices) v.semantic = VertexSemantic::deck;
  EXPECT_TRUE(validate(cyc).ok()) << "bridges may contain cycles";

  auto pos = tree_graph({{0, 0, 0}, {1.5, 0, 0}}, {{0, 1}});
  EXPECT_TRUE(validate(pos).has(ViolationKind::kPositionOutOfRange));

  auto attr = tree_graph({{0, 0, 0}, {1, 0, 0}}, {{0, 1}});
  attr.vertices[1].radius = 0.1;
  EXPECT_TRUE(validate(attr).has(ViolationKind::kAttributeMismatch));

  auto split = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1}, {2, 3}});
  EXPECT_TRUE(validate(split).has(ViolationKind::kDisconnectedOrEmpty));
}

TEST(Validate, CactusRadiusBounds) {
  ProcGraph g;
  g.category = Category::cactus;
  for (int i = 0; i < 30; ++i) g.vertices.push_back(Vertex{{0.0, i / 29.0, 0.0}, 0.05, std::nullopt});
  for (int i = 0; i + 1 < 30; ++i) g.edges.push_back(Edge{i, i + 1, {}, {}, {}});
  EXPECT_TRUE(validate(g).ok());
  g.vertices[4].radius = 0.3;
  EXPECT_TRUE(validate(g).has(ViolationKind::kRadiusOutOfRange));
  g.vertices[4].radius = 0.25;
  EXPECT_TRUE(validate(g).ok());
}

TEST(Normalize, HandComputedSegment) {
  const auto g = normalize(tree_graph({{0, 0, 0}, {2, 0, 0}}, {{0, 1}}));
  EXPECT_EQ(g.vertices[0].pos, (Vec3{0.0, 0.5, 0.5}));
  EXPECT_EQ(g.vertices[1].pos, (Vec3{1.0, 0.5, 0.5}));
  EXPECT_DOUBLE_EQ(g.norm.scale, 2.0);
}

TEST(Normalize, AlreadyNormalizedIsUnchanged) {
  const auto g = tree_graph({{0, 0.5, 0.5}, {1, 0.5, 0.5}}, {{0, 1}});
  const auto n = normalize(g);
  EXPECT_EQ(n.vertices, g.vertices);
  EXPECT_DOUBLE_EQ(n.norm.scale, 1.0);
}

TEST(Normalize, CoincidentVerticesAreDegenerate) {
  const auto g = tree_graph({{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}}, {{0, 1}});
  EXPECT_EQ(error_code_of([&] { normalize(g); }), ErrorCode::kDegenerateBBox);
}

TEST(Normalize, IdempotentAndInvertible) {
  CounterRng rng = CounterRng::derive(11, {});
  for (int trial = 0; trial < 200; ++trial) {
    ProcGraph g;
    g.category = Category::cactus;
    const int n = rng.uniform_int(2, 12);
    for (int i = 0; i < n; ++i) {
      g.vertices.push_back(Vertex{{rng.uniform(-50, 50), rng.uniform(-5, 80), rng.uniform(1, 3)}, rng.uniform(0.1, 1.0),
                                  std::nullopt});
    }
    const ProcGraph once = normalize(g);
    const ProcGraph twice = normalize(once);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(twice.vertices[i].pos[k], once.vertices[i].pos[k], 1e-9);
        // (p - center) / scale reproduces the stored position.
        EXPECT_NEAR((g.vertices[i].pos[k] - once.norm.center[k]) / once.norm.scale, once.vertices[i].pos[k], 1e-9);
      }
    }
    const ProcGraph back = denormalize(twice);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        const double want = g.vertices[i].pos[k];
        EXPECT_NEAR(back.vertices[i].pos[k], want, 1e-9 * std::max(1.0, std::abs(want)));
      }
      EXPECT_NEAR(*back.vertices[i].radius, *g.vertices[i].radius, 1e-9);
    }
    // Longest axis spans exactly [0,1].
    double lo[3] = {1, 1, 1}, hi[3] = {0, 0, 0};
    for (const Vertex& v : once.vertices) {
      for (int k = 0; k < 3; ++k) {
        lo[k] = std::min(lo[k], v.pos[k]);
        hi[k] = std::max(hi[k], v.pos[k]);
      }
    }
    EXPECT_NEAR(std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]}), 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(lo[k] + hi[k], 1.0, 1e-9) << "axis " << k << " centered";
  }
}

std::vector<std::pair<int, int>> pairs(const std::vector<DirectedEdge>& order) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : order) out.push_back({e.from, e.to});
  return out;
}

using Pairs = std::vector<std::pair<int, int>>;

TEST(TraverseDfs, Path) {
  const auto g = tree_graph({{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}}, {{1, 2}, {0, 1}});
  EXPECT_EQ(pairs(traverse_dfs(g)), (Pairs{{0, 1}, {1, 2}}));
}

TEST(TraverseDfs, ChildrenInLexicographicOrder) {
  const auto g = tree_graph({{0.5, 0, 0}, {0.8, 0.1, 0}, {0.2, 0.9, 0}}, {{0, 1}, {0, 2}});
  EXPECT_EQ(pairs(traverse_dfs(g)), (Pairs{{0, 2}, {0, 1}}));
}

TEST(TraverseDfs, FullBinaryTreePreOrder) {
  // 0 -> {1 (x=.1), 2 (x=.9)}; 1 -> {3, 4}; 2 -> {5, 6}. Hand pre-order.
  const auto g = tree_graph({{0.5, 0, 0}, {0.1, 0.5, 0}, {0.9, 0.5, 0}, {0.0, 1, 0}, {0.2, 1, 0}, {0.8, 1, 0}, {1.0, 1, 0}},
                            {{2, 6}, {0, 2}, {1, 4}, {0, 1}, {2, 5}, {1, 3}});
  EXPECT_EQ(pairs(traverse_dfs(g)), (Pairs{{0, 1}, {1, 3}, {1, 4}, {0, 2}, {2, 5}, {2, 6}}));
}

TEST(TraverseDfs, CycleIsAnError) {
  const auto g = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_EQ(error_code_of([&] { traverse_dfs(g); }), ErrorCode::kCyclicGraph);
}

TEST(TraverseBfs, PathEqualsDfs) {
  const auto g = tree_graph({{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}}, {{1, 2}, {0, 1}});
  EXPECT_EQ(pairs(traverse_bfs(g)), (Pairs{{0, 1}, {1, 2}}));
}

TEST(TraverseBfs, StarLevelsFirst) {
  const auto g = tree_graph({{0.5, 0.5, 0}, {0.9, 0.5, 0}, {0.1, 0.5, 0}, {0.5, 0.9, 0}, {0.5, 0.1, 0}, {0.95, 0.95, 0}},
                            {{1, 5}, {0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto p = pairs(traverse_bfs(g));
  ASSERT_EQ(p.size(), 5u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(p[i].first, 0);
  EXPECT_EQ(p[4], (std::pair<int, int>{1, 5}));
  EXPECT_EQ((Pairs{p.begin(), p.begin() + 4}), (Pairs{{0, 2}, {0, 4}, {0, 3}, {0, 1}}));
}

TEST(TraverseBfs, TriangleClosesLast) {
  const auto g = tree_graph({{0, 0, 0}, {0.2, 1, 0}, {0.8, 1, 0}}, {{0, 1}, {1, 2}, {2, 0}});
  const auto p = pairs(traverse_bfs(g));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], (std::pair<int, int>{0, 1}));
  EXPECT_EQ(p[1], (std::pair<int, int>{0, 2}));
  EXPECT_EQ(p[2], (std::pair<int, int>{1, 2}));
}

TEST(Traverse, PermutationOfEdgesAndDeterministic) {
  for (const Category c : kAllCategories) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const ProcGraph g = generate(GenParams::defaults(c, seed));
      const auto order = c == Category::bridge ? traverse_bfs(g) : traverse_dfs(g);
      ASSERT_EQ(order.size(), g.edges.size());
      std::set<int> used;
      for (const auto& e : order) {
        used.insert(e.edge_index);
        const Edge& ed = g.edges[e.edge_index];
        EXPECT_TRUE((ed.a == e.from && ed.b == e.to) || (ed.a == e.to && ed.b == e.from));
      }
      EXPECT_EQ(used.size(), g.edges.size());
      EXPECT_EQ(order, c == Category::bridge ? traverse_bfs(g) : traverse_dfs(g));
    }
  }
}

TEST(Traverse, DisconnectedInputRejected) {
  const auto g = tree_graph({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{0, 1}, {2, 3}});
  EXPECT_EQ(error_code_of([&] { traverse_bfs(g); }), ErrorCode::kInvalidGraph);
  EXPECT_EQ(error_code_of([&] { traverse_dfs(g); }), ErrorCode::kInvalidGraph);
}

TEST(GraphIo, RoundTripAndUnknownFields) {
  for (const Category c : kAllCategories) {
    const ProcGraph g = generate(GenParams::defaults(c, 5));
    const ProcGraph back = graph_from_string(graph_to_string(g));
    ASSERT_EQ(back.vertices.size(), g.vertices.size());
    ASSERT_EQ(back.edges, g.edges);
    for (std::size_t i = 0; i < g.vertices.size(); ++i) {
      EXPECT_EQ(back.vertices[i], g.vertices[i]);
    }
    EXPECT_EQ(back.norm, g.norm);
  }
  const std::string bad = R"({"category":"tree","norm":{"center":[0,0,0],"scale":1},"vertices":[],"edges":[],"extra":1})";
  EXPECT_EQ(error_code_of([&] { graph_from_string(bad); }), ErrorCode::kFormat);
  const std::string bad_vertex =
      R"({"category":"tree","norm":{"center":[0,0,0],"scale":1},"vertices":[{"pos":[0,0,0],"colour":2}],"edges":[]})";
  EXPECT_EQ(error_code_of([&] { graph_from_string(bad_vertex); }), ErrorCode::kFormat);
}

}  // namespace
}  // namespace procgraph
