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

// Trains a small cactus prior in memory, then reconstructs one held-out
// cactus from its silhouette with and without tree search.

#include <cstdlib>
#include <iostream>

#include "procgraph/procgraph.hpp"

int main(int argc, char** argv) {
  using namespace procgraph;
  const std::uint64_t target_seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 424242;

  std::vector<TokenSeq> corpus;
  for (std::uint64_t s = 0; s < 300; ++s) corpus.push_back(encode(generate(GenParams::defaults(Category::cactus, s))));
  const NGramPrior prior = train_ngram(corpus);

  const ProcGraph truth = generate(GenParams::defaults(Category::cactus, target_seed));
  const SilhouetteMask target = render_graph(truth);

  SearchConfig cfg;
  cfg.seed = 7;
  const DecodeResult greedy = decode_greedy(prior, cfg);
  const DecodeResult searched = decode_with_mcts(prior, target, cfg);

  std::cout << "target: " << truth.vertices.size() << " vertices, " << target.count() << " pixels\n";
  std::cout << "greedy reward " << reward(render_graph(greedy.graph), target) << " ("
            << greedy.graph.edges.size() << " edges)\n";
  std::cout << "mcts   reward " << reward(render_graph(searched.graph), target) << " ("
            << searched.graph.edges.size() << " edges, " << searched.trace.size() << " steps)\n";
  return 0;
}
