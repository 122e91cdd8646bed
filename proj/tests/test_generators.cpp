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

#include <map>
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace procgraph {
namespace {

using testing::error_code_of;

TEST(Generators, SameSeedSameBytes) {
  for (const Category c : kAllCategories) {
    const auto a = graph_to_string(generate(GenParams::defaults(c, 99)));
    const auto b = graph_to_string(generate(GenParams::defaults(c, 99)));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, graph_to_string(generate(GenParams::defaults(c, 100))));
  }
}

TEST(Generators, OutputValidAndInBand) {
  for (const Category c : kAllCategories) {
    const IntRange band = GenParams::default_band(c);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const ProcGraph g = generate(GenParams::defaults(c, s));
      EXPECT_TRUE(validate(g).ok()) << to_string(c) << " seed " << s;
      const int n = static_cast<int>(g.vertices.size());
      EXPECT_GE(n, band.lo);
      EXPECT_LE(n, band.hi);
    }
  }
}

TEST(Generators, NoBranchingGivesSinglePath) {
  GenParams p = GenParams::defaults(Category::cactus, 4);
  p.cactus.branch_prob = 0.0;
  p.vertex_band = {2, 100};
  const ProcGraph g = generate(p);
  const int n = static_cast<int>(g.vertices.size());
  EXPECT_GE(n, p.cactus.trunk_segments.lo + 1);
  EXPECT_LE(n, p.cactus.trunk_segments.hi + 1);
  EXPECT_EQ(g.edges.size() + 1, g.vertices.size());
  std::map<int, int> degree;
  for (const Edge& e : g.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  for (const auto& [v, d] : degree) EXPECT_LE(d, 2) << "vertex " << v;
  EXPECT_EQ(degree[0], 1) << "root is a path end";
}

TEST(Generators, ZeroDepthTreeIsBareTrunk) {
  GenParams p = GenParams::defaults(Category::tree, 8);
  p.tree.max_depth = 0;
  p.vertex_band = {2, 400};
  const ProcGraph g = generate(p);
  EXPECT_LE(static_cast<int>(g.vertices.size()), p.tree.trunk_segments.hi + 1);
  for (const Edge& e : g.edges) EXPECT_EQ(std::abs(e.a - e.b), 1);
}

TEST(Generators, CactusTrunkGrowsUpward) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ProcGraph g = generate(GenParams::defaults(Category::cactus, s));
    EXPECT_LT(g.vertices[0].pos.y, 0.05) << "root near the bottom of the unit cube";
  }
}

TEST(Generators, BridgeCountsByConstruction) {
  GenParams p = GenParams::defaults(Category::bridge, 1);
  p.bridge.deck_nodes = {6, 6};
  p.vertex_band = {2, 140};
  const ProcGraph g = generate(p);
  EXPECT_EQ(g.vertices.size(), 10u);
  EXPECT_EQ(g.edges.size(), 19u);
  int cables = 0;
  for (const Edge& e : g.edges) {
    if (e.e_semantic == EdgeSemantic::cable) {
      ++cables;
      EXPECT_EQ(e.force_sign, ForceSign::tension);
      EXPECT_EQ(e.cem_type, CemType::deviation);
    } else {
      EXPECT_EQ(e.force_sign, ForceSign::compression);
    }
  }
  EXPECT_EQ(cables, 12);
  EXPECT_EQ(g.vertices[0].semantic, VertexSemantic::deck);
}

TEST(Generators, AllBridgeCablesInTension) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const ProcGraph g = generate(GenParams::defaults(Category::bridge, s));
    for (const Edge& e : g.edges) {
      if (e.e_semantic == EdgeSemantic::cable) { EXPECT_EQ(e.force_sign, ForceSign::tension); }
    }
  }
}

TEST(Generators, UnreachableBandAndBadParams) {
  GenParams p = GenParams::defaults(Category::cactus, 0);
  p.vertex_band = {1000, 2000};
  EXPECT_EQ(error_code_of([&] { generate(p); }), ErrorCode::kBandUnreachable);
  p = GenParams::defaults(Category::tree, 0);
  p.tree.branch_prob = 1.5;
  EXPECT_EQ(error_code_of([&] { generate(p); }), ErrorCode::kConfig);
  p = GenParams::defaults(Category::tree, 0);
  EXPECT_EQ(error_code_of([&] { gen_cactus(p); }), ErrorCode::kConfig);
}

TEST(Cylinders, OnePerEdgeWithRadii) {
  ProcGraph g;
  g.category = Category::cactus;
  g.vertices = {Vertex{{0.5, 0, 0.5}, 0.06, {}}, Vertex{{0.5, 1, 0.5}, 0.042, {}}};
  g.edges = {Edge{0, 1, {}, {}, {}}};
  const auto c = graph_to_cylinders(g);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_DOUBLE_EQ(c[0].r0, 0.06);
  EXPECT_DOUBLE_EQ(c[0].r1, 0.042);

  const ProcGraph t = generate(GenParams::defaults(Category::tree, 2));
  const auto tc = graph_to_cylinders(t);
  EXPECT_EQ(tc.size(), t.edges.size());
  for (std::size_t i = 0; i < tc.size(); ++i) {
    EXPECT_DOUBLE_EQ(tc[i].r0, 0.008);
    EXPECT_DOUBLE_EQ(tc[i].r1, 0.008);
    EXPECT_EQ(tc[i].p0, t.vertices[t.edges[i].a].pos);
  }
}

TEST(Mesh, CountsForOneFrustum) {
  const TriMesh m = export_mesh({Cylinder{{0, 0, 0}, {0, 1, 0}, 0.1, 0.05}}, 16);
  EXPECT_EQ(m.vertices.size(), 34u);
  EXPECT_EQ(m.faces.size(), 64u);
  EXPECT_TRUE(export_mesh({}).vertices.empty());
  EXPECT_EQ(error_code_of([] { export_mesh({}, 2); }), ErrorCode::kConfig);
}

TEST(Mesh, EulerCharacteristicAndClosedPerFrustum) {
  CounterRng rng = CounterRng::derive(5, {});
  for (int trial = 0; trial < 20; ++trial) {
    const int sides = static_cast<int>(rng.uniform_int(3, 24));
    const Cylinder c{{rng.uniform(), rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform(), rng.uniform()},
                     rng.uniform(0.01, 0.1), rng.uniform(0.01, 0.1)};
    const TriMesh m = export_mesh({c, c}, sides);
    const int per = 2 * sides + 2;
    ASSERT_EQ(static_cast<int>(m.vertices.size()), 2 * per);
    for (int k = 0; k < 2; ++k) {
      std::map<std::pair<int, int>, int> edge_use;
      int faces = 0;
      for (const auto& f : m.faces) {
        if (f[0] / per != k) continue;
        ++faces;
        for (int i = 0; i < 3; ++i) {
          const int a = f[i], b = f[(i + 1) % 3];
          EXPECT_EQ(a / per, k);
          ++edge_use[std::minmax(a, b)];
        }
      }
      const int V = per;
      const int E = static_cast<int>(edge_use.size());
      EXPECT_EQ(V - E + faces, 2);
      for (const auto& [e, uses] : edge_use) EXPECT_EQ(uses, 2) << "every edge shared by two faces";
    }
  }
}

TEST(Mesh, ObjRecords) {
  std::ostringstream out;
  write_obj(out, export_mesh({Cylinder{{0, 0, 0}, {0, 1, 0}, 0.1, 0.1}}, 4));
  std::istringstream in(out.str());
  std::string tag;
  int v = 0, f = 0, min_index = 1 << 30;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "v") ++v;
    if (tag == "f") {
      ++f;
      int i;
      while (ls >> i) min_index = std::min(min_index, i);
    }
  }
  EXPECT_EQ(v, 10);
  EXPECT_EQ(f, 16);
  EXPECT_EQ(min_index, 1);
}

}  // namespace
}  // namespace procgraph
