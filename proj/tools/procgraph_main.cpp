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

// procgraph: dataset generation, prior training, reconstruction, evaluation.
//
// Exit codes: 0 ok, 1 usage or config error, 2 runtime error.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "procgraph/pipeline.hpp"

namespace {

using namespace procgraph;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> category;
  std::optional<double> lambda;
  std::optional<int> ratio;
  std::optional<int> rollout;
  std::optional<int> k;
  std::optional<double> p;
  std::optional<double> c;
  std::optional<int> k_candidates;
  std::optional<int> threads;
  std::optional<int> count;
  std::optional<std::string> dataset;
  std::optional<std::string> model;
  std::optional<std::string> out;
  bool no_timing = false;

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : load_config(config);
    if (category) {
      try {
        cfg.category = parse_category(*category);
      } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
      }
    }
    if (seed) cfg.seed = *seed;
    if (lambda) cfg.search.lambda = *lambda;
    if (ratio) cfg.search.ratio = *ratio;
    if (rollout) cfg.search.rollout_edges = *rollout;
    if (k) cfg.search.sampling.top_k = *k;
    if (p) cfg.search.sampling.top_p = *p;
    if (c) cfg.search.c = *c;
    if (k_candidates) cfg.search.k_candidates = *k_candidates;
    if (threads) cfg.search.threads = *threads;
    if (count) cfg.count = *count;
    if (dataset) cfg.dataset_dir = *dataset;
    if (model) cfg.model_path = *model;
    if (out) cfg.out_dir = *out;
    if (no_timing) cfg.timing = false;
    cfg.search.seed = cfg.seed;
    cfg.check();
    return cfg;
  }
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "JSON run config");
  app.add_option("--seed", o.seed);
  app.add_option("--category", o.category, "cactus, tree or bridge");
  app.add_option("--lambda", o.lambda, "reward mix");
  app.add_option("--ratio", o.ratio, "simulations per candidate");
  app.add_option("--rollout-L", o.rollout, "rollout horizon in edges");
  app.add_option("--k", o.k, "top-k");
  app.add_option("--p", o.p, "top-p");
  app.add_option("--c", o.c, "exploration constant");
  app.add_option("--candidates", o.k_candidates, "proposals per expansion");
  app.add_option("--threads", o.threads, "simulation workers");
  app.add_option("--count", o.count, "dataset size");
  app.add_option("--dataset", o.dataset, "dataset root");
  app.add_option("--model", o.model, "prior model file");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--no-timing", o.no_timing, "write wall_ms as 0");
}

int run(int argc, char** argv) {
  CLI::App app{"procgraph: procedural graph reconstruction from silhouettes"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  add_common(app, o);

  auto* gen = app.add_subcommand("gen-dataset", "generate graphs, token corpora and target masks");
  auto* train = app.add_subcommand("train-prior", "train the n-gram prior on the train split");

  auto* recon = app.add_subcommand("reconstruct", "decode a graph for a target mask");
  std::string target;
  bool greedy = false;
  bool mcts = false;
  recon->add_option("target", target, "target mask (PGM)")->required();
  auto* greedy_flag = recon->add_flag("--greedy", greedy, "sample from the prior without search");
  recon->add_flag("--mcts", mcts, "tree search against the target (default)")->excludes(greedy_flag);

  auto* eval = app.add_subcommand("evaluate", "metrics over a pairs manifest");
  std::string pairs;
  eval->add_option("pairs", pairs, "pairs manifest (JSON)")->required();

  auto* render = app.add_subcommand("render", "render a graph to a silhouette mask");
  std::string graph_in, mask_out, obj_out;
  render->add_option("graph", graph_in)->required();
  render->add_option("mask", mask_out)->required();
  render->add_option("--obj", obj_out, "also write a mesh");

  auto* tok = app.add_subcommand("tokenize", "graph file to token file");
  std::string tok_in, tok_out;
  tok->add_option("graph", tok_in)->required();
  tok->add_option("tokens", tok_out)->required();

  auto* detok = app.add_subcommand("detokenize", "token file to graph file");
  std::string detok_in, detok_out;
  detok->add_option("tokens", detok_in)->required();
  detok->add_option("graph", detok_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  RunConfig cfg;
  try {
    cfg = o.resolve();
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*gen) {
      const auto manifest = cmd_gen_dataset(cfg);
      std::cout << "wrote " << cfg.count << " " << to_string(cfg.category) << " graphs to "
                << category_dir(cfg).string() << " (train " << manifest["split"]["train"].size() << ", val "
                << manifest["split"]["val"].size() << ", test " << manifest["split"]["test"].size() << ")\n";
    } else if (*train) {
      const TrainResult r = cmd_train_prior(cfg);
      std::cout << "trained on " << r.sequences << " sequences, " << r.contexts << " contexts -> " << cfg.model_path
                << "\n";
      if (r.val_perplexity) std::cout << "held-out perplexity " << *r.val_perplexity << "\n";
    } else if (*recon) {
      const ReconstructSummary s = cmd_reconstruct(cfg, target, greedy ? DecodeMode::greedy : DecodeMode::mcts);
      std::cout << summary_to_json(s).dump() << "\n";
    } else if (*eval) {
      const EvalReport r = cmd_evaluate(cfg, pairs);
      std::cout << row_to_json(r.aggregate).dump() << "\n";
      if (!r.missing.empty()) {
        for (const auto& m : r.missing) std::cerr << "missing: " << m << "\n";
        return 2;
      }
    } else if (*render) {
      const SilhouetteMask m = cmd_render(cfg, graph_in, mask_out, obj_out);
      std::cout << m.count() << " foreground pixels\n";
    } else if (*tok) {
      const TokenSeq s = cmd_tokenize(tok_in, tok_out);
      std::cout << s.tokens.size() << " tokens\n";
    } else if (*detok) {
      const ProcGraph g = cmd_detokenize(detok_in, detok_out);
      std::cout << g.vertices.size() << " vertices, " << g.edges.size() << " edges\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return e.code() == ErrorCode::kConfig ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
