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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/generators.hpp"
#include "procgraph/prior.hpp"
#include "procgraph/raster.hpp"
#include "procgraph/tokenizer.hpp"

namespace procgraph {

struct SearchConfig {
  double c = 1.4142135623730951;  // exploration constant
  int k_candidates = 8;           // proposals drawn per expansion (before dedup)
  int ratio = 4;                  // simulations per distinct candidate
  int rollout_edges = 10;         // L
  double lambda = 0.5;
  int max_edges = 512;
  SamplingParams sampling;
  std::uint64_t seed = 0;
  int batch = 1;    // selections per simulation wave
  int threads = 1;  // workers per wave; never changes results
  Camera camera;

  void check() const {
    auto bad = [](const char* what) { throw Error(ErrorCode::kConfig, std::string("SearchConfig: ") + what); };
    if (!(c >= 0.0)) bad("c must be >= 0");
    if (k_candidates < 1) bad("k_candidates must be >= 1");
    if (ratio < 0) bad("ratio must be >= 0");
    if (rollout_edges < 0) bad("rollout L must be >= 0");
    if (!(lambda >= 0.0 && lambda <= 1.0)) bad("lambda outside [0,1]");
    if (max_edges < 1) bad("max_edges must be >= 1");
    if (sampling.top_k < 1) bad("k must be >= 1");
    if (!(sampling.top_p > 0.0 && sampling.top_p <= 1.0)) bad("p outside (0,1]");
    if (batch < 1 || threads < 1) bad("batch and threads must be >= 1");
  }
};

/// A partial graph (token prefix) in the search tree.
struct SearchNode {
  std::vector<Token> state;
  EdgeProposal edge;  // proposal that produced this node from its parent
  std::vector<std::unique_ptr<SearchNode>> children;
  int visits = 0;
  double q = 0.0;
  bool terminal = false;
  int edges = 0;    // complete edges in `state`
  int pending = 0;  // selections in flight during a wave
};

inline double ucb_score(double q, long n_parent, long n_child, double c) {
  return q + c * std::sqrt(std::log(static_cast<double>(n_parent)) / (1.0 + static_cast<double>(n_child)));
}

/// Descends by maximal UCB (lowest index on ties) until a node without
/// children or a terminal node. In-flight selections count as visits with
/// reward 0; with none pending this is the plain rule.
inline std::vector<SearchNode*> select(SearchNode& root, double c) {
  std::vector<SearchNode*> path{&root};
  SearchNode* node = &root;
  while (!node->terminal && !node->children.empty()) {
    const long n_parent = std::max(1, node->visits + node->pending);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node->children.size(); ++i) {
      const SearchNode& ch = *node->children[i];
      const int n = ch.visits + ch.pending;
      const double q = ch.pending == 0 ? ch.q : ch.q * ch.visits / n;
      const double s = ucb_score(q, n_parent, n, c);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    node = node->children[best].get();
    path.push_back(node);
  }
  return path;
}

/// Draws cfg.k_candidates proposals and adds the distinct ones as children,
/// in order of first appearance. Returns the number of children added.
inline std::size_t expand(SearchNode& leaf, const SequencePrior& prior, const SearchConfig& cfg, CounterRng& rng) {
  if (leaf.terminal) return 0;
  std::vector<Token> work;
  std::size_t added = 0;
  for (int i = 0; i < cfg.k_candidates; ++i) {
    work = leaf.state;
    EdgeProposal prop = extend_with_edge(prior, work, cfg.sampling, rng);
    const bool dup = std::any_of(leaf.children.begin(), leaf.children.end(),
                                 [&prop](const auto& ch) { return ch->edge == prop; });
    if (dup) continue;
    auto child = std::make_unique<SearchNode>();
    child->terminal = prop.terminal;
    child->edges = leaf.edges + (prop.terminal ? 0 : 1);
    child->state = std::move(work);
    child->edge = std::move(prop);
    leaf.children.push_back(std::move(child));
    ++added;
  }
  return added;
}

inline void propagate(std::span<SearchNode* const> path, double r) {
  for (SearchNode* node : path) {
    node->visits += 1;
    node->q += (r - node->q) / node->visits;
  }
}

// -----------------------------------------------------------------------------
// Rendering token sequences

/// Cylinder of one encoded edge, or nothing when both endpoints share a
/// tuple (decode drops such edges).
inline std::optional<Cylinder> edge_cylinder(const CategorySchema& schema, std::span<const Token> edge,
                                             double default_radius = kDefaultRadius) {
  const int nv = static_cast<int>(schema.vertex_slots().size());
  if (std::equal(edge.begin(), edge.begin() + nv, edge.begin() + nv)) return std::nullopt;
  Cylinder c{{}, {}, default_radius, default_radius};
  for (int end = 0; end < 2; ++end) {
    Vec3& p = end == 0 ? c.p0 : c.p1;
    double& r = end == 0 ? c.r0 : c.r1;
    for (int s = 0; s < nv; ++s) {
      const Token t = edge[end * nv + s];
      switch (schema.vertex_slots()[s]) {
        case SlotKind::x: p.x = dequantize(t); break;
        case SlotKind::y: p.y = dequantize(t); break;
        case SlotKind::z: p.z = dequantize(t); break;
        case SlotKind::radius: r = dequantize(t); break;
        default: break;
      }
    }
  }
  return c;
}

/// ORs the capsules of complete edges [first_edge, ...) of `seq` into `mask`.
/// Equals rendering decode(seq) when first_edge is 0 and the mask starts empty.
inline void render_edges(const CategorySchema& schema, std::span<const Token> seq, std::size_t first_edge,
                         SilhouetteMask& mask, const Camera& cam) {
  const std::size_t p = static_cast<std::size_t>(schema.p());
  for (std::size_t e = first_edge;; ++e) {
    const std::size_t start = 1 + e * (p + 1);
    if (start + p > seq.size()) break;
    const auto edge = seq.subspan(start, p);
    if (std::any_of(edge.begin(), edge.end(), [&](Token t) { return t >= schema.split(); })) break;
    if (const auto cyl = edge_cylinder(schema, edge)) rasterize_cylinder(mask, *cyl, cam);
  }
}

namespace detail {

enum : std::uint64_t { kTagExpand = 1, kTagSimulate = 2, kTagGreedy = 3 };

struct RenderBase {
  const SilhouetteMask* mask = nullptr;  // render of the first `edges` edges
  std::size_t edges = 0;
};

inline double simulate_from(const SearchNode& node, const SequencePrior& prior, const SilhouetteMask& target,
                            const SearchConfig& cfg, CounterRng& rng, const RenderBase& base) {
  std::vector<Token> seq = node.state;
  if (!node.terminal) {
    int edges = node.edges;
    for (int l = 0; l < cfg.rollout_edges && edges < cfg.max_edges; ++l) {
      if (extend_with_edge(prior, seq, cfg.sampling, rng).terminal) break;
      ++edges;
    }
  }
  SilhouetteMask mask = base.mask ? *base.mask : SilhouetteMask(cfg.camera);
  render_edges(prior.schema(), seq, base.mask ? base.edges : 0, mask, cfg.camera);
  return reward(mask, target, cfg.lambda);
}

}  // namespace detail

/// Rolls out up to cfg.rollout_edges edges after `node` (stopping at EOS),
/// renders the whole sequence and scores it against `target`.
inline double simulate(const SearchNode& node, const SequencePrior& prior, const SilhouetteMask& target,
                       const SearchConfig& cfg, CounterRng& rng) {
  return detail::simulate_from(node, prior, target, cfg, rng, {});
}

// -----------------------------------------------------------------------------
// Decoding loops

struct TraceStep {
  int step = 0;
  int n_candidates = 0;
  int sims = 0;
  double best_q = 0.0;
  std::vector<Token> committed;  // tokens appended at this step
  double wall_ms = 0.0;
};

struct DecodeResult {
  ProcGraph graph;
  TokenSeq sequence;
  std::vector<TraceStep> trace;
};

namespace detail {

// Runs `budget` simulations from `root` in waves of cfg.batch selections.
inline void run_simulations(SearchNode& root, int budget, int step, const SequencePrior& prior,
                            const SilhouetteMask& target, const SearchConfig& cfg, const RenderBase& base) {
  struct Job {
    std::vector<SearchNode*> path;
    CounterRng rng;
    double reward = 0.0;
  };
  std::vector<Job> jobs;
  for (int done = 0; done < budget;) {
    const int wave = std::min(cfg.batch, budget - done);
    jobs.clear();
    for (int j = 0; j < wave; ++j) {
      const auto slot = static_cast<std::uint64_t>(done + j);
      auto path = select(root, cfg.c);
      SearchNode* leaf = path.back();
      if (leaf != &root && !leaf->terminal && leaf->visits > 0 && leaf->children.empty() &&
          leaf->edges < cfg.max_edges) {
        CounterRng erng = CounterRng::derive(cfg.seed, {static_cast<std::uint64_t>(step), kTagExpand, slot + 1});
        if (expand(*leaf, prior, cfg, erng) > 0) path.push_back(leaf->children.front().get());
      }
      for (SearchNode* n : path) ++n->pending;
      jobs.push_back({std::move(path), CounterRng::derive(cfg.seed, {static_cast<std::uint64_t>(step), kTagSimulate, slot})});
    }

    auto work = [&](std::size_t first, std::size_t stride) {
      for (std::size_t j = first; j < jobs.size(); j += stride) {
        jobs[j].reward = simulate_from(*jobs[j].path.back(), prior, target, cfg, jobs[j].rng, base);
      }
    };
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), jobs.size());
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
    }

    for (Job& job : jobs) {
      for (SearchNode* n : job.path) --n->pending;
      propagate(job.path, job.reward);
    }
    done += wave;
  }
}

inline std::size_t argmax_q(const SearchNode& root) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < root.children.size(); ++i) {
    if (root.children[i]->q > root.children[best]->q) best = i;
  }
  return best;
}

}  // namespace detail

/// Edge-by-edge decoding: each step expands the committed prefix, spends
/// n * ratio simulations (none when n == 1) and commits the child with the
/// highest mean reward, until EOS or cfg.max_edges.
inline DecodeResult decode_with_mcts(const SequencePrior& prior, const SilhouetteMask& target, const SearchConfig& cfg) {
  cfg.check();
  if (target.width != cfg.camera.width || target.height != cfg.camera.height) {
    throw Error(ErrorCode::kDimensionMismatch, "target mask does not match the camera resolution");
  }
  if (target.count() == 0) throw Error(ErrorCode::kEmptyTarget, "target mask has no foreground");
  const CategorySchema& schema = prior.schema();

  DecodeResult result;
  std::vector<Token> seq{schema.bos()};
  SilhouetteMask committed(cfg.camera);
  int edges = 0;
  for (int step = 0;; ++step) {
    if (edges >= cfg.max_edges) {
      seq.push_back(schema.eos());
      break;
    }
    const auto t0 = std::chrono::steady_clock::now();
    SearchNode root;
    root.state = seq;
    root.edges = edges;
    CounterRng rng = CounterRng::derive(cfg.seed, {static_cast<std::uint64_t>(step), detail::kTagExpand, 0});
    expand(root, prior, cfg, rng);
    const int n = static_cast<int>(root.children.size());

    TraceStep ts;
    ts.step = step;
    ts.n_candidates = n;
    std::size_t chosen = 0;
    if (n > 1 && cfg.ratio == 0) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < root.children.size(); ++i) {
        const double lp = proposal_log_prob(prior, seq, root.children[i]->edge);
        if (lp > best) {
          best = lp;
          chosen = i;
        }
      }
    } else if (n > 1) {
      const detail::RenderBase base{&committed, static_cast<std::size_t>(edges)};
      detail::run_simulations(root, n * cfg.ratio, step, prior, target, cfg, base);
      ts.sims = n * cfg.ratio;
      chosen = detail::argmax_q(root);
      ts.best_q = root.children[chosen]->q;
    }

    const SearchNode& pick = *root.children[chosen];
    ts.committed = proposal_tokens(schema, seq, pick.edge);
    seq.insert(seq.end(), ts.committed.begin(), ts.committed.end());
    if (!pick.terminal) {
      if (const auto cyl = edge_cylinder(schema, pick.edge.tokens)) rasterize_cylinder(committed, *cyl, cfg.camera);
      ++edges;
    }
    ts.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(std::move(ts));
    if (pick.terminal) break;
  }
  result.sequence = TokenSeq{prior.category(), std::move(seq)};
  result.graph = decode(result.sequence);
  return result;
}

/// Ancestral top-k/top-p sampling until EOS or cfg.max_edges; no target.
inline DecodeResult decode_greedy(const SequencePrior& prior, const SearchConfig& cfg) {
  cfg.check();
  const CategorySchema& schema = prior.schema();
  CounterRng rng = CounterRng::derive(cfg.seed, {detail::kTagGreedy});
  std::vector<Token> seq{schema.bos()};
  int edges = 0;
  while (true) {
    if (edges >= cfg.max_edges) {
      seq.push_back(schema.eos());
      break;
    }
    if (extend_with_edge(prior, seq, cfg.sampling, rng).terminal) break;
    ++edges;
  }
  DecodeResult result;
  result.sequence = TokenSeq{prior.category(), std::move(seq)};
  result.graph = decode(result.sequence);
  return result;
}

}  // namespace procgraph
