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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "procgraph/generators.hpp"
#include "procgraph/graph_io.hpp"
#include "procgraph/mcts.hpp"
#include "procgraph/metrics.hpp"
#include "procgraph/prior.hpp"
#include "procgraph/raster.hpp"
#include "procgraph/tokenizer.hpp"

namespace procgraph {

namespace fs = std::filesystem;

/// Everything a pipeline command reads. Persisted as config.json next to
/// outputs so a run can be repeated from the file alone.
struct RunConfig {
  Category category = Category::cactus;
  std::uint64_t seed = 0;
  std::string dataset_dir = "data";
  std::string model_path = "prior.bin";
  std::string out_dir = "out";
  int count = 1000;
  int order = 12;
  double alpha = 0.1;
  int cd_points = 2000;
  bool timing = true;
  SearchConfig search;

  void check() const {
    if (count < 1) throw Error(ErrorCode::kConfig, "count must be >= 1");
    if (order < 0) throw Error(ErrorCode::kConfig, "order must be >= 0");
    if (!(alpha >= 0.0)) throw Error(ErrorCode::kConfig, "alpha must be >= 0");
    if (cd_points < 1) throw Error(ErrorCode::kConfig, "cd_points must be >= 1");
    search.check();
  }
};

inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json s;
  s["c"] = c.search.c;
  s["k_candidates"] = c.search.k_candidates;
  s["ratio"] = c.search.ratio;
  s["rollout_L"] = c.search.rollout_edges;
  s["lambda"] = c.search.lambda;
  s["max_edges"] = c.search.max_edges;
  s["k"] = c.search.sampling.top_k;
  s["p"] = c.search.sampling.top_p;
  s["temperature"] = c.search.sampling.temperature;
  s["batch"] = c.search.batch;
  s["threads"] = c.search.threads;
  s["resolution"] = c.search.camera.width;

  nlohmann::ordered_json j;
  j["category"] = to_string(c.category);
  j["seed"] = c.seed;
  j["dataset"] = c.dataset_dir;
  j["model"] = c.model_path;
  j["out"] = c.out_dir;
  j["count"] = c.count;
  j["order"] = c.order;
  j["alpha"] = c.alpha;
  j["cd_points"] = c.cd_points;
  j["timing"] = c.timing;
  j["search"] = s;
  return j;
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kConfig, std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Applies the keys present in `j` on top of `base`; unknown keys are errors.
inline RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  try {
    detail::reject_unknown_keys(j, {"category", "seed", "dataset", "model", "out", "count", "order", "alpha",
                                    "cd_points", "timing", "search"},
                                "config");
    if (j.contains("search")) {
      detail::reject_unknown_keys(j["search"], {"c", "k_candidates", "ratio", "rollout_L", "lambda", "max_edges", "k",
                                                "p", "temperature", "batch", "threads", "resolution"},
                                  "config.search");
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (j.contains("category")) {
    std::string name;
    detail::read_field(j, "category", name);
    try {
      base.category = parse_category(name);
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, e.what());
    }
  }
  detail::read_field(j, "seed", base.seed);
  detail::read_field(j, "dataset", base.dataset_dir);
  detail::read_field(j, "model", base.model_path);
  detail::read_field(j, "out", base.out_dir);
  detail::read_field(j, "count", base.count);
  detail::read_field(j, "order", base.order);
  detail::read_field(j, "alpha", base.alpha);
  detail::read_field(j, "cd_points", base.cd_points);
  detail::read_field(j, "timing", base.timing);
  if (j.contains("search")) {
    const auto& s = j["search"];
    SearchConfig& sc = base.search;
    detail::read_field(s, "c", sc.c);
    detail::read_field(s, "k_candidates", sc.k_candidates);
    detail::read_field(s, "ratio", sc.ratio);
    detail::read_field(s, "rollout_L", sc.rollout_edges);
    detail::read_field(s, "lambda", sc.lambda);
    detail::read_field(s, "max_edges", sc.max_edges);
    detail::read_field(s, "k", sc.sampling.top_k);
    detail::read_field(s, "p", sc.sampling.top_p);
    detail::read_field(s, "temperature", sc.sampling.temperature);
    detail::read_field(s, "batch", sc.batch);
    detail::read_field(s, "threads", sc.threads);
    int res = sc.camera.width;
    detail::read_field(s, "resolution", res);
    if (res < 8) throw Error(ErrorCode::kConfig, "resolution must be >= 8");
    sc.camera.width = sc.camera.height = res;
  }
  base.search.seed = base.seed;
  return base;
}

inline RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "cannot parse config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

// -----------------------------------------------------------------------------
// gen-dataset

struct SplitSizes {
  int train = 0;
  int val = 0;
  int test = 0;
};

/// 95/1/4 proportions; val and test are rounded, train takes the remainder.
inline SplitSizes split_sizes(int n) {
  if (n < 1) throw Error(ErrorCode::kConfig, "dataset size must be >= 1");
  SplitSizes s;
  s.val = static_cast<int>(std::lround(n * 0.01));
  s.test = static_cast<int>(std::lround(n * 0.04));
  s.train = n - s.val - s.test;
  return s;
}

inline fs::path category_dir(const RunConfig& cfg) { return fs::path(cfg.dataset_dir) / to_string(cfg.category); }

/// Seeds cfg.seed .. cfg.seed + count - 1; the first 95% train, then val, then test.
inline nlohmann::ordered_json cmd_gen_dataset(const RunConfig& cfg) {
  cfg.check();
  const SplitSizes sizes = split_sizes(cfg.count);
  const fs::path dir = category_dir(cfg);
  ensure_dir(dir);

  std::vector<TokenSeq> corpora[3];
  nlohmann::ordered_json split = {{"train", nlohmann::json::array()},
                                  {"val", nlohmann::json::array()},
                                  {"test", nlohmann::json::array()}};
  const char* names[3] = {"train", "val", "test"};
  for (int i = 0; i < cfg.count; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    const ProcGraph g = generate(GenParams::defaults(cfg.category, seed));
    const TokenSeq seq = encode(g);
    const std::string stem = (dir / std::to_string(seed)).string();
    save_graph(stem + ".graph", g);
    write_text_file(stem + ".tokens", corpus_to_string(cfg.category, {seq}));
    save_mask(stem + ".mask.pgm", render_graph(g, cfg.search.camera));
    const int part = i < sizes.train ? 0 : i < sizes.train + sizes.val ? 1 : 2;
    split[names[part]].push_back(seed);
    corpora[part].push_back(seq);
  }
  for (int part = 0; part < 3; ++part) {
    write_text_file((dir / (std::string(names[part]) + ".tokens")).string(),
                    corpus_to_string(cfg.category, corpora[part]));
  }
  nlohmann::ordered_json manifest;
  manifest["category"] = to_string(cfg.category);
  manifest["count"] = cfg.count;
  manifest["first_seed"] = cfg.seed;
  manifest["split"] = split;
  write_json((dir / "manifest.json").string(), manifest);
  write_json((dir / "config.json").string(), config_to_json(cfg));
  return manifest;
}

// -----------------------------------------------------------------------------
// train-prior

struct TrainResult {
  std::size_t sequences = 0;
  std::size_t contexts = 0;
  std::optional<double> val_perplexity;
};

inline Corpus load_corpus(const std::string& path) { return corpus_from_string(read_text_file(path)); }

inline TrainResult cmd_train_prior(const RunConfig& cfg) {
  cfg.check();
  const fs::path dir = category_dir(cfg);
  const fs::path train_path = dir / "train.tokens";
  if (!fs::exists(train_path)) throw Error(ErrorCode::kIo, "missing corpus " + train_path.string());
  const Corpus train = load_corpus(train_path.string());
  if (train.category != cfg.category) {
    throw Error(ErrorCode::kSchemaMismatch, "corpus " + train_path.string() + " is not " + std::string(to_string(cfg.category)));
  }
  if (train.sequences.empty()) throw Error(ErrorCode::kIo, "corpus " + train_path.string() + " is empty");
  const NGramPrior prior = train_ngram(train.sequences, cfg.order, cfg.alpha);
  const fs::path model(cfg.model_path);
  if (model.has_parent_path()) ensure_dir(model.parent_path());
  prior.save(cfg.model_path);

  TrainResult r;
  r.sequences = train.sequences.size();
  r.contexts = prior.context_count();
  const fs::path val_path = dir / "val.tokens";
  if (fs::exists(val_path)) {
    const Corpus val = load_corpus(val_path.string());
    if (!val.sequences.empty()) r.val_perplexity = perplexity(prior, val.sequences);
  }
  return r;
}

// -----------------------------------------------------------------------------
// reconstruct

enum class DecodeMode { mcts, greedy };

struct ReconstructSummary {
  DecodeMode mode = DecodeMode::mcts;
  double reward = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int edges = 0;
  int vertices = 0;
  double wall_ms = 0.0;
};

inline nlohmann::ordered_json summary_to_json(const ReconstructSummary& s) {
  nlohmann::ordered_json j;
  j["mode"] = s.mode == DecodeMode::mcts ? "mcts" : "greedy";
  j["reward"] = s.reward;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["edges"] = s.edges;
  j["vertices"] = s.vertices;
  j["wall_ms"] = s.wall_ms;
  return j;
}

inline std::string trace_to_jsonl(const std::vector<TraceStep>& trace, bool timing) {
  std::string out;
  for (const TraceStep& t : trace) {
    nlohmann::ordered_json j;
    j["step"] = t.step;
    j["n"] = t.n_candidates;
    j["sims"] = t.sims;
    j["best_q"] = t.best_q;
    j["committed"] = t.committed;
    j["wall_ms"] = timing ? t.wall_ms : 0.0;
    out += j.dump() + "\n";
  }
  return out;
}

/// Output files land in cfg.out_dir: reconstruction.graph, .mask.pgm, .obj,
/// reconstruction.tokens, trace.jsonl, summary.json, config.json.
inline ReconstructSummary cmd_reconstruct(const RunConfig& cfg, const std::string& target_path, DecodeMode mode) {
  cfg.check();
  const NGramPrior prior = NGramPrior::load(cfg.model_path, cfg.category);
  const SilhouetteMask target = load_mask(target_path);
  if (target.width != cfg.search.camera.width || target.height != cfg.search.camera.height) {
    throw Error(ErrorCode::kDimensionMismatch, "target " + target_path + " is " + std::to_string(target.width) + "x" +
                                                   std::to_string(target.height) + ", camera is " +
                                                   std::to_string(cfg.search.camera.width) + "x" +
                                                   std::to_string(cfg.search.camera.height));
  }
  if (target.count() == 0) throw Error(ErrorCode::kEmptyTarget, "target " + target_path + " has no foreground");

  const auto t0 = std::chrono::steady_clock::now();
  const DecodeResult result =
      mode == DecodeMode::mcts ? decode_with_mcts(prior, target, cfg.search) : decode_greedy(prior, cfg.search);
  const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const SilhouetteMask rendered = render_graph(result.graph, cfg.search.camera);
  const MaskOverlap ov = mask_overlap(rendered, target);
  ReconstructSummary s;
  s.mode = mode;
  s.reward = reward(rendered, target, cfg.search.lambda);
  s.precision = ov.precision;
  s.recall = ov.recall;
  s.edges = static_cast<int>(result.graph.edges.size());
  s.vertices = static_cast<int>(result.graph.vertices.size());
  s.wall_ms = cfg.timing ? wall : 0.0;

  const fs::path out(cfg.out_dir);
  ensure_dir(out);
  save_graph((out / "reconstruction.graph").string(), result.graph);
  write_text_file((out / "reconstruction.tokens").string(), corpus_to_string(cfg.category, {result.sequence}));
  save_mask((out / "reconstruction.mask.pgm").string(), rendered);
  {
    std::ostringstream obj;
    write_obj(obj, export_mesh(graph_to_cylinders(result.graph)));
    write_text_file((out / "reconstruction.obj").string(), obj.str());
  }
  write_text_file((out / "trace.jsonl").string(), trace_to_jsonl(result.trace, cfg.timing));
  write_json((out / "summary.json").string(), summary_to_json(s));
  write_json((out / "config.json").string(), config_to_json(cfg));
  return s;
}

// -----------------------------------------------------------------------------
// evaluate

/// One prediction/reference pair. `target` (a mask) is optional; without it
/// the reference graph is rendered. `summary` supplies wall_ms when present.
struct EvalPair {
  std::string id;
  std::string prediction;
  std::string reference;
  std::string target;
  std::string summary;
};

inline std::vector<EvalPair> load_pairs(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "cannot parse pairs manifest " + path + ": " + e.what());
  }
  detail::reject_unknown_keys(j, {"pairs"}, "pairs manifest");
  if (!j.contains("pairs") || !j["pairs"].is_array()) throw Error(ErrorCode::kFormat, "pairs manifest needs a 'pairs' array");
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return p.empty() || fs::path(p).is_absolute() ? p : (base / p).string(); };
  std::vector<EvalPair> pairs;
  for (const auto& e : j["pairs"]) {
    detail::reject_unknown_keys(e, {"id", "prediction", "reference", "target", "summary"}, "pair");
    EvalPair p;
    try {
      p.id = e.at("id").get<std::string>();
      p.prediction = resolve(e.at("prediction").get<std::string>());
      p.reference = resolve(e.at("reference").get<std::string>());
      if (e.contains("target")) p.target = resolve(e["target"].get<std::string>());
      if (e.contains("summary")) p.summary = resolve(e["summary"].get<std::string>());
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kFormat, "pair entries need string id, prediction and reference");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

struct EvalRow {
  std::string id;
  double cd = 0.0;
  double topo = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double iou = 0.0;
  double reward = 0.0;
  double wall_ms = 0.0;
};

/// Chamfer between surface samples of the two graphs' cylinders; each pair
/// draws from its own stream so rows do not depend on evaluation order.
inline EvalRow evaluate_pair(const RunConfig& cfg, const std::string& id, const ProcGraph& prediction,
                             const ProcGraph& reference, const SilhouetteMask& target) {
  EvalRow row;
  row.id = id;
  std::uint64_t id_hash = 0xCBF29CE484222325ULL;  // FNV-1a
  for (const unsigned char ch : id) id_hash = (id_hash ^ ch) * 0x100000001B3ULL;
  // Same stream on both sides, so identical graphs sample identical points.
  CounterRng ra = CounterRng::derive(cfg.seed, {0xE7A1, id_hash});
  CounterRng rb = ra;
  const auto pc = graph_to_cylinders(prediction);
  const auto rc = graph_to_cylinders(reference);
  row.cd = pc.empty() || rc.empty() ? std::numeric_limits<double>::infinity()
                                    : chamfer(sample_surface_points(pc, cfg.cd_points, ra),
                                              sample_surface_points(rc, cfg.cd_points, rb));
  row.topo = topo_sim(prediction, reference);
  const SilhouetteMask rendered = render_graph(prediction, cfg.search.camera);
  const MaskOverlap ov = mask_overlap(rendered, target);
  row.precision = ov.precision;
  row.recall = ov.recall;
  row.iou = ov.iou;
  row.reward = reward(rendered, target, cfg.search.lambda);
  return row;
}

inline nlohmann::ordered_json row_to_json(const EvalRow& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["cd"] = std::isfinite(r.cd) ? nlohmann::ordered_json(r.cd) : nlohmann::ordered_json(nullptr);
  j["topo"] = r.topo;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["iou"] = r.iou;
  j["reward"] = r.reward;
  j["wall_ms"] = r.wall_ms;
  return j;
}

struct EvalReport {
  std::vector<EvalRow> rows;
  EvalRow aggregate;  // means over rows; cd over finite values only
  std::vector<std::string> missing;
};

/// Writes <out>/report.jsonl: one line per evaluated pair, one per pair with
/// missing files, then the aggregate row.
inline EvalReport cmd_evaluate(const RunConfig& cfg, const std::string& pairs_path) {
  cfg.check();
  const std::vector<EvalPair> pairs = load_pairs(pairs_path);
  EvalReport report;
  std::string lines;
  for (const EvalPair& p : pairs) {
    std::vector<std::string> absent;
    for (const std::string* f : {&p.prediction, &p.reference, &p.target, &p.summary}) {
      if (!f->empty() && !fs::exists(*f)) absent.push_back(*f);
    }
    if (!absent.empty()) {
      report.missing.insert(report.missing.end(), absent.begin(), absent.end());
      nlohmann::ordered_json j;
      j["id"] = p.id;
      j["missing"] = absent;
      lines += j.dump() + "\n";
      continue;
    }
    const ProcGraph pred = load_graph(p.prediction);
    const ProcGraph ref = load_graph(p.reference);
    const SilhouetteMask target = p.target.empty() ? render_graph(ref, cfg.search.camera) : load_mask(p.target);
    EvalRow row = evaluate_pair(cfg, p.id, pred, ref, target);
    if (!p.summary.empty() && cfg.timing) {
      try {
        row.wall_ms = nlohmann::json::parse(read_text_file(p.summary)).value("wall_ms", 0.0);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kFormat, "bad summary " + p.summary + ": " + e.what());
      }
    }
    lines += row_to_json(row).dump() + "\n";
    report.rows.push_back(row);
  }

  EvalRow& agg = report.aggregate;
  agg.id = "aggregate";
  std::size_t finite_cd = 0;
  for (const EvalRow& r : report.rows) {
    if (std::isfinite(r.cd)) {
      agg.cd += r.cd;
      ++finite_cd;
    }
    agg.topo += r.topo;
    agg.precision += r.precision;
    agg.recall += r.recall;
    agg.iou += r.iou;
    agg.reward += r.reward;
    agg.wall_ms += r.wall_ms;
  }
  const double n = static_cast<double>(report.rows.size());
  if (n > 0) {
    agg.cd = finite_cd ? agg.cd / static_cast<double>(finite_cd) : std::numeric_limits<double>::infinity();
    agg.topo /= n;
    agg.precision /= n;
    agg.recall /= n;
    agg.iou /= n;
    agg.reward /= n;
    agg.wall_ms /= n;
  }
  nlohmann::ordered_json a = row_to_json(agg);
  a["count"] = report.rows.size();
  a["missing"] = report.missing.size();
  lines += a.dump() + "\n";

  const fs::path out(cfg.out_dir);
  ensure_dir(out);
  write_text_file((out / "report.jsonl").string(), lines);
  write_json((out / "config.json").string(), config_to_json(cfg));
  return report;
}

// -----------------------------------------------------------------------------
// render / tokenize / detokenize

inline SilhouetteMask cmd_render(const RunConfig& cfg, const std::string& graph_path, const std::string& mask_path,
                                 const std::string& obj_path = {}) {
  const ProcGraph g = load_graph(graph_path);
  const SilhouetteMask m = render_graph(g, cfg.search.camera);
  save_mask(mask_path, m);
  if (!obj_path.empty()) {
    std::ostringstream obj;
    write_obj(obj, export_mesh(graph_to_cylinders(g)));
    write_text_file(obj_path, obj.str());
  }
  return m;
}

inline TokenSeq cmd_tokenize(const std::string& graph_path, const std::string& tokens_path) {
  const TokenSeq seq = encode(load_graph(graph_path));
  write_text_file(tokens_path, corpus_to_string(seq.category, {seq}));
  return seq;
}

/// Decodes the first sequence of a token file.
inline ProcGraph cmd_detokenize(const std::string& tokens_path, const std::string& graph_path) {
  const Corpus c = load_corpus(tokens_path);
  if (c.sequences.empty()) throw Error(ErrorCode::kFormat, tokens_path + " holds no sequence");
  const ProcGraph g = decode(c.sequences.front());
  save_graph(graph_path, g);
  return g;
}

}  // namespace procgraph
