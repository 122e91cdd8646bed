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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "procgraph/core.hpp"
#include "procgraph/tokenizer.hpp"

namespace procgraph {

// -----------------------------------------------------------------------------
// Slot mask

/// Admissible next-token ids for a well-formed prefix (one or two ranges).
inline std::vector<TokenRange> admissible(const CategorySchema& schema, std::span<const Token> prefix) {
  const NextPosition pos = next_position(schema, prefix);
  const TokenRange eos{schema.eos(), schema.eos() + 1};
  switch (pos.kind) {
    case NextPosition::kStart: return {{schema.bos(), schema.bos() + 1}};
    case NextPosition::kFirst: return {schema.slot_range(0), eos};
    case NextPosition::kSlot: return {schema.slot_range(pos.slot)};
    case NextPosition::kBoundary: return {{schema.split(), schema.split() + 1}, eos};
    case NextPosition::kDone: return {};
  }
  return {};
}

inline bool is_admissible(const CategorySchema& schema, std::span<const Token> prefix, Token t) {
  for (const TokenRange& r : admissible(schema, prefix)) {
    if (r.contains(t)) return true;
  }
  return false;
}


/// Symbol seen by the n-gram for token `tok` at index `i` of `seq` (tokens
/// before `i` must be present). Continuous slots with a reference coordinate
/// become offsets from it: a first-endpoint coordinate relative to the same
/// coordinate of the previous edge's second endpoint, a second-endpoint
/// coordinate relative to the first endpoint. Everything else is absolute.
inline constexpr std::int32_t kRelativeBase = 1 << 12;

struct SymbolRef {
  bool relative = false;
  Token ref = 0;
};

inline SymbolRef symbol_ref(const CategorySchema& schema, std::span<const Token> seq, std::size_t i) {
  if (i == 0) return {};
  const std::size_t j = i - 1;
  const std::size_t period = static_cast<std::size_t>(schema.p()) + 1;
  const std::size_t s = j % period;
  if (s >= static_cast<std::size_t>(schema.p()) || is_categorical(schema.slot(static_cast<int>(s)))) return {};
  const std::size_t nv = schema.vertex_slots().size();
  if (s < nv) {
    if (j < period) return {};
    return {true, seq[i - period + nv]};
  }
  if (s < 2 * nv) return {true, seq[i - nv]};
  return {};
}

inline std::int32_t to_symbol(SymbolRef r, Token tok) { return r.relative ? kRelativeBase + (tok - r.ref) : tok; }
inline Token from_symbol(SymbolRef r, std::int32_t sym) { return r.relative ? sym - kRelativeBase + r.ref : sym; }

inline std::int32_t context_symbol(const CategorySchema& schema, std::span<const Token> seq, std::size_t i) {
  if (i > 0) {
    const std::size_t s = (i - 1) % (static_cast<std::size_t>(schema.p()) + 1);
    if (s < schema.vertex_slots().size()) return seq[i];
  }
  return to_symbol(symbol_ref(schema, seq, i), seq[i]);
}

// -----------------------------------------------------------------------------
// Prior interface

/// Autoregressive next-token model over one category's vocabulary.
class SequencePrior {
 public:
  virtual ~SequencePrior() = default;

  virtual Category category() const = 0;

  /// Writes a vocab-sized distribution into `dist`; zero outside the slot mask.
  virtual void next_dist(std::span<const Token> prefix, std::vector<double>& dist) const = 0;

  const CategorySchema& schema() const { return CategorySchema::get(category()); }
};

inline std::vector<double> next_dist(const SequencePrior& prior, std::span<const Token> prefix) {
  std::vector<double> dist;
  prior.next_dist(prefix, dist);
  return dist;
}

// -----------------------------------------------------------------------------
// Back-off n-gram prior

/// Counts of successor tokens for every context of 0..order preceding
/// tokens, keyed together with the structural slot class of the predicted
/// position. Level 0 is the per-slot unigram with add-alpha smoothing over the
/// admissible set A. Each seen level k >= 1 interpolates toward the one below:
///   P_k(t) = w * c_k(t) / n_k + (1 - w) * P_{k-1}(t)
/// where w depends on k and on the power-of-two bucket of n_k, fitted by EM on
/// every tenth training sequence. Without enough sequences to hold some out,
/// w = n_k / (n_k + alpha * |A|).
class NGramPrior final : public SequencePrior {
 public:
  static constexpr std::uint32_t kFormatVersion = 3;

  NGramPrior() = default;

  Category category() const override { return category_; }
  int order() const { return order_; }
  double alpha() const { return alpha_; }
  double copy_weight() const { return copy_weight_; }
  std::size_t context_count() const { return keys_.size(); }

  void next_dist(std::span<const Token> prefix, std::vector<double>& dist) const override {
    const CategorySchema& schema = this->schema();
    dist.assign(schema.vocab_size(), 0.0);
    const NextPosition pos = next_position(schema, prefix);
    if (pos.kind == NextPosition::kDone) {
      throw Error(ErrorCode::kMalformedSequence, "next_dist: prefix already terminated");
    }
    const auto ranges = admissible(schema, prefix);
    int size = 0;
    for (const TokenRange& r : ranges) size += r.size();
    for (const TokenRange& r : ranges) {
      for (Token t = r.lo; t < r.hi; ++t) dist[t] = 1.0 / size;
    }
    if (pos.kind == NextPosition::kStart) return;

    const double beta = alpha_ * size;
    const SymbolRef next_ref = symbol_ref(schema, prefix, prefix.size());
    walk_levels(schema, prefix, pos, ranges, next_ref, [&](int k, std::size_t idx, double total) {
      const double w = level_weight(k, total, beta);
      for (const TokenRange& r : ranges) {
        for (Token t = r.lo; t < r.hi; ++t) dist[t] *= 1.0 - w;
      }
      for (std::uint32_t s = offsets_[idx]; s < offsets_[idx + 1]; ++s) {
        const Token t = from_symbol(next_ref, succ_symbols_[s]);
        if (contains(ranges, t)) dist[t] += w * succ_counts_[s] / total;
      }
    });
    if (pos.kind == NextPosition::kSlot && copy_weight_ > 0.0) mix_copy(schema, prefix, pos.slot, dist);
  }

  /// Fitted interpolation weights, `order` rows of kCountBuckets; empty when
  /// the Dirichlet rule is in use.
  const std::vector<double>& level_weights() const { return weights_; }
  static constexpr int kCountBuckets = 8;

  friend NGramPrior train_ngram(const std::vector<TokenSeq>& corpus, int order, double alpha);

  // Binary model file: magic, version, schema id, vocab size, order, alpha,
  // copy weight, interpolation weights, then the sorted context table.
  // Integers little-endian.
  std::string serialize() const {
    std::string out;
    out.append("PGNGRAM\0", 8);
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(category_));
    put_u32(out, static_cast<std::uint32_t>(CategorySchema::get(category_).vocab_size()));
    put_u32(out, static_cast<std::uint32_t>(order_));
    std::uint64_t alpha_bits = 0;
    std::memcpy(&alpha_bits, &alpha_, sizeof alpha_bits);
    put_u64(out, alpha_bits);
    std::memcpy(&alpha_bits, &copy_weight_, sizeof alpha_bits);
    put_u64(out, alpha_bits);
    put_u32(out, static_cast<std::uint32_t>(weights_.size()));
    for (const double w : weights_) {
      std::memcpy(&alpha_bits, &w, sizeof alpha_bits);
      put_u64(out, alpha_bits);
    }
    put_u64(out, keys_.size());
    put_u64(out, succ_symbols_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      put_u64(out, keys_[i]);
      put_u32(out, offsets_[i + 1] - offsets_[i]);
    }
    for (std::size_t s = 0; s < succ_symbols_.size(); ++s) {
      put_u32(out, static_cast<std::uint32_t>(succ_symbols_[s]));
      put_u32(out, succ_counts_[s]);
    }
    return out;
  }

  static NGramPrior deserialize(const std::string& data) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
      if (data.size() - pos < n) throw Error(ErrorCode::kFormat, "prior model truncated");
    };
    auto u32 = [&] {
      need(4);
      std::uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
      return v;
    };
    auto u64 = [&] {
      need(8);
      std::uint64_t v = 0;
      for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
      return v;
    };
    need(8);
    if (data.compare(0, 8, std::string("PGNGRAM\0", 8)) != 0) throw Error(ErrorCode::kFormat, "not a prior model file");
    pos = 8;
    if (u32() != kFormatVersion) throw Error(ErrorCode::kFormat, "unsupported prior model version");
    NGramPrior m;
    const std::uint32_t cat = u32();
    if (cat > 2) throw Error(ErrorCode::kFormat, "bad schema id");
    m.category_ = static_cast<Category>(cat);
    if (u32() != static_cast<std::uint32_t>(CategorySchema::get(m.category_).vocab_size())) {
      throw Error(ErrorCode::kSchemaMismatch, "vocabulary size differs from schema");
    }
    m.order_ = static_cast<int>(u32());
    const std::uint64_t alpha_bits = u64();
    std::memcpy(&m.alpha_, &alpha_bits, sizeof alpha_bits);
    const std::uint64_t copy_bits = u64();
    std::memcpy(&m.copy_weight_, &copy_bits, sizeof copy_bits);
    if (!(m.copy_weight_ >= 0.0 && m.copy_weight_ <= 1.0)) throw Error(ErrorCode::kFormat, "bad copy weight");
    const std::uint32_t n_weights = u32();
    if (n_weights != 0 && n_weights != static_cast<std::uint32_t>(m.order_ * kCountBuckets)) {
      throw Error(ErrorCode::kFormat, "bad interpolation weight table");
    }
    for (std::uint32_t i = 0; i < n_weights; ++i) {
      const std::uint64_t bits = u64();
      double w = 0.0;
      std::memcpy(&w, &bits, sizeof w);
      if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::kFormat, "bad interpolation weight");
      m.weights_.push_back(w);
    }
    const std::uint64_t n_ctx = u64();
    const std::uint64_t n_succ = u64();
    need(n_ctx * 12 + n_succ * 8);
    m.keys_.resize(n_ctx);
    m.offsets_.assign(n_ctx + 1, 0);
    for (std::uint64_t i = 0; i < n_ctx; ++i) {
      m.keys_[i] = u64();
      m.offsets_[i + 1] = m.offsets_[i] + u32();
    }
    if (m.offsets_.back() != n_succ) throw Error(ErrorCode::kFormat, "prior model successor count mismatch");
    m.succ_symbols_.resize(n_succ);
    m.succ_counts_.resize(n_succ);
    for (std::uint64_t s = 0; s < n_succ; ++s) {
      m.succ_symbols_[s] = static_cast<std::int32_t>(u32());
      m.succ_counts_[s] = u32();
    }
    return m;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
  }

  /// Loads a model; when `expected` is given the stored schema id must match.
  static NGramPrior load(const std::string& path, std::optional<Category> expected = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    NGramPrior m = deserialize(ss.str());
    if (expected && *expected != m.category_) {
      throw Error(ErrorCode::kSchemaMismatch, "model " + path + " is for " + std::string(to_string(m.category_)) +
                                                  ", expected " + std::string(to_string(*expected)));
    }
    return m;
  }

 private:
  static int count_bucket(double n) {
    return std::min(kCountBuckets - 1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1);
  }
  static std::size_t weight_index(int k, double n) {
    return static_cast<std::size_t>((k - 1) * kCountBuckets + count_bucket(n));
  }

  double level_weight(int k, double total, double beta) const {
    if (k == 0 || weights_.empty()) return total / (total + beta);
    return weights_[weight_index(k, total)];
  }

  // Calls f(level, table index, admissible count) for every level whose
  // context was seen, shallowest first, stopping at the first unseen one.
  template <class F>
  void walk_levels(const CategorySchema& schema, std::span<const Token> prefix, const NextPosition& pos,
                   const std::vector<TokenRange>& ranges, SymbolRef next_ref, F&& f) const {
    std::uint64_t key = position_key(schema, prefix.size(), pos);
    for (int k = 0;; ++k) {
      const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
      if (it == keys_.end() || *it != key) break;
      const std::size_t idx = static_cast<std::size_t>(it - keys_.begin());
      double total = 0.0;
      for (std::uint32_t s = offsets_[idx]; s < offsets_[idx + 1]; ++s) {
        if (contains(ranges, from_symbol(next_ref, succ_symbols_[s]))) total += succ_counts_[s];
      }
      if (total > 0.0) f(k, idx, total);
      if (k + 1 > order_ || static_cast<std::size_t>(k + 1) > prefix.size()) break;
      key = extend_key(key, context_symbol(schema, prefix, prefix.size() - 1 - static_cast<std::size_t>(k)));
    }
  }

  void fit_weights(const std::vector<TokenSeq>& held_out);
  void build_table(std::vector<std::pair<std::uint64_t, std::int32_t>>& entries);

  // First-endpoint slots lean toward vertices already in the prefix that agree
  // with the slots chosen so far:
  //   P(t) = (1 - w) * P_ngram(t) + w * P_ngram(t | t completes a known vertex)
  // falling back to vertex frequency when the n-gram puts no mass there.
  void mix_copy(const CategorySchema& schema, std::span<const Token> prefix, int slot, std::vector<double>& dist) const {
    const std::size_t nv = schema.vertex_slots().size();
    const std::size_t period = static_cast<std::size_t>(schema.p()) + 1;
    if (static_cast<std::size_t>(slot) >= nv) return;
    const std::size_t start = prefix.size() - static_cast<std::size_t>(slot);
    const std::size_t complete = (start - 1) / period;
    if (complete == 0) return;
    thread_local std::vector<double> hits;
    hits.assign(dist.size(), 0.0);
    bool any = false;
    for (std::size_t e = 0; e < complete; ++e) {
      for (std::size_t v = 0; v < 2; ++v) {
        const std::size_t at = 1 + e * period + v * nv;
        if (!std::equal(prefix.begin() + static_cast<std::ptrdiff_t>(at),
                        prefix.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(slot)),
                        prefix.begin() + static_cast<std::ptrdiff_t>(start))) {
          continue;
        }
        hits[prefix[at + static_cast<std::size_t>(slot)]] += 1.0;
        any = true;
      }
    }
    if (!any) return;
    double mass = 0.0;
    for (std::size_t t = 0; t < dist.size(); ++t) {
      if (hits[t] > 0.0) mass += dist[t];
    }
    double hit_total = 0.0;
    for (const double h : hits) hit_total += h;
    for (std::size_t t = 0; t < dist.size(); ++t) {
      const double copy = mass > 0.0 ? (hits[t] > 0.0 ? dist[t] / mass : 0.0) : hits[t] / hit_total;
      dist[t] = (1.0 - copy_weight_) * dist[t] + copy_weight_ * copy;
    }
  }

  // Boundary contexts also see how many edges are already placed, in buckets of
  // kEdgeBucket, so that stopping can depend on progress.
  static constexpr std::size_t kEdgeBucket = 8;
  static constexpr std::size_t kMaxBucket = 32;

  static std::uint64_t position_key(const CategorySchema& schema, std::size_t prefix_len, const NextPosition& pos) {
    std::uint64_t cls = static_cast<std::uint64_t>(pos.class_id(schema.p()));
    if (pos.kind == NextPosition::kBoundary) {
      const std::size_t edges = prefix_len / (static_cast<std::size_t>(schema.p()) + 1);
      cls += 64 * (1 + std::min(edges / kEdgeBucket, kMaxBucket));
    }
    return class_key(static_cast<int>(cls));
  }

  static std::uint64_t class_key(int cls) { return mix64(0x51A7C0DEULL + static_cast<std::uint64_t>(cls) * 0x9E3779B97F4A7C15ULL); }
  static bool contains(const std::vector<TokenRange>& ranges, Token t) {
    for (const TokenRange& r : ranges) {
      if (r.contains(t)) return true;
    }
    return false;
  }

  static std::uint64_t extend_key(std::uint64_t key, std::int32_t t) {
    return mix64(key ^ (static_cast<std::uint64_t>(t) + 1) * 0xC2B2AE3D27D4EB4FULL);
  }

  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }

  Category category_ = Category::cactus;
  int order_ = 12;
  double alpha_ = 0.1;
  double copy_weight_ = 0.0;
  std::vector<std::uint64_t> keys_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::int32_t> succ_symbols_;
  std::vector<std::uint32_t> succ_counts_;
  std::vector<double> weights_;
};

inline void NGramPrior::build_table(std::vector<std::pair<std::uint64_t, std::int32_t>>& entries) {
  std::sort(entries.begin(), entries.end());
  keys_.clear();
  offsets_.assign(1, 0);
  succ_symbols_.clear();
  succ_counts_.clear();
  for (std::size_t i = 0; i < entries.size();) {
    const std::uint64_t key = entries[i].first;
    keys_.push_back(key);
    while (i < entries.size() && entries[i].first == key) {
      const std::int32_t t = entries[i].second;
      std::uint32_t count = 0;
      while (i < entries.size() && entries[i] == std::pair{key, t}) {
        ++count;
        ++i;
      }
      succ_symbols_.push_back(t);
      succ_counts_.push_back(count);
    }
    offsets_.push_back(static_cast<std::uint32_t>(succ_symbols_.size()));
  }
}

// EM for the interpolation weights on held-out tokens. Each token is explained
// by a top-down walk that stops at level k with probability w_k.
inline void NGramPrior::fit_weights(const std::vector<TokenSeq>& held_out) {
  constexpr int kIterations = 30;
  const CategorySchema& schema = this->schema();
  std::vector<double> base;
  std::vector<std::size_t> first{0};
  std::vector<std::pair<std::size_t, double>> levels;  // (weight slot, c_k(truth) / n_k)
  for (const TokenSeq& seq : held_out) {
    const auto& tok = seq.tokens;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      const std::span<const Token> prefix(tok.data(), i);
      const auto ranges = admissible(schema, prefix);
      int size = 0;
      for (const TokenRange& r : ranges) size += r.size();
      const SymbolRef ref = symbol_ref(schema, prefix, i);
      const std::int32_t truth = to_symbol(ref, tok[i]);
      double p0 = 1.0 / size;
      walk_levels(schema, prefix, next_position(schema, prefix), ranges, ref, [&](int k, std::size_t idx, double total) {
        double c = 0.0;
        for (std::uint32_t s = offsets_[idx]; s < offsets_[idx + 1]; ++s) {
          if (succ_symbols_[s] == truth) c = succ_counts_[s];
        }
        if (k == 0) {
          const double beta = alpha_ * size;
          p0 = (c + beta * p0) / (total + beta);
        } else {
          levels.push_back({weight_index(k, total), c / total});
        }
      });
      base.push_back(p0);
      first.push_back(levels.size());
    }
  }

  std::vector<double> w(static_cast<std::size_t>(order_ * kCountBuckets));
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double n = std::ldexp(1.0, static_cast<int>(i) % kCountBuckets);
    w[i] = n / (n + alpha_ * kBins);
  }
  std::vector<double> used(w.size()), reached(w.size()), chain;
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(used.begin(), used.end(), 0.0);
    std::fill(reached.begin(), reached.end(), 0.0);
    for (std::size_t o = 0; o < base.size(); ++o) {
      chain.assign(1, base[o]);
      for (std::size_t j = first[o]; j < first[o + 1]; ++j) {
        const auto [slot, ml] = levels[j];
        chain.push_back(w[slot] * ml + (1.0 - w[slot]) * chain.back());
      }
      const double top = chain.back();
      if (!(top > 0.0)) continue;
      double above = 1.0;
      for (std::size_t j = first[o + 1]; j-- > first[o];) {
        const auto [slot, ml] = levels[j];
        reached[slot] += above * chain[j - first[o] + 1] / top;
        used[slot] += above * w[slot] * ml / top;
        above *= 1.0 - w[slot];
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (reached[i] > 0.0) w[i] = std::min(used[i] / reached[i], 1.0 - 1e-9);
    }
  }
  weights_ = std::move(w);
}

/// Accumulates counts for context lengths 0..order over every position of
/// every sequence. The corpus must be non-empty and single-schema. With at
/// least ten sequences every tenth is first held out to fit the weights.
inline NGramPrior train_ngram(const std::vector<TokenSeq>& corpus, int order = 12, double alpha = 0.1) {
  if (corpus.empty()) throw Error(ErrorCode::kConfig, "train_ngram: empty corpus");
  if (order < 0) throw Error(ErrorCode::kConfig, "train_ngram: negative order");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kConfig, "train_ngram: alpha must be >= 0");
  const Category cat = corpus.front().category;
  const CategorySchema& schema = CategorySchema::get(cat);
  for (const TokenSeq& seq : corpus) {
    if (seq.category != cat) throw Error(ErrorCode::kMixedSchema, "corpus mixes categories");
  }

  using Entries = std::vector<std::pair<std::uint64_t, std::int32_t>>;
  std::vector<std::int32_t> symbols, contexts;
  auto count_into = [&](const TokenSeq& seq, Entries& entries) {
    const auto& tok = seq.tokens;
    symbols.resize(tok.size());
    contexts.resize(tok.size());
    for (std::size_t i = 0; i < tok.size(); ++i) {
      symbols[i] = to_symbol(symbol_ref(schema, tok, i), tok[i]);
      contexts[i] = context_symbol(schema, tok, i);
    }
    for (std::size_t i = 1; i < tok.size(); ++i) {
      const std::span<const Token> prefix(tok.data(), i);
      std::uint64_t key = NGramPrior::position_key(schema, i, next_position(schema, prefix));
      entries.push_back({key, symbols[i]});
      for (std::size_t k = 1; k <= static_cast<std::size_t>(order) && k <= i; ++k) {
        key = NGramPrior::extend_key(key, contexts[i - k]);
        entries.push_back({key, symbols[i]});
      }
    }
  };
  auto reserve = [&](Entries& entries, std::size_t skip_mod) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (i % 10 != skip_mod) n += corpus[i].tokens.size() * static_cast<std::size_t>(order + 1);
    }
    entries.reserve(n);
  };

  const std::size_t nv = schema.vertex_slots().size();
  const std::size_t period = static_cast<std::size_t>(schema.p()) + 1;
  std::size_t repeats = 0;
  std::size_t later_edges = 0;
  for (const TokenSeq& seq : corpus) {
    const std::size_t n_edges = check_structure(seq).complete_edges;
    const auto& tok = seq.tokens;
    std::set<std::vector<Token>> seen;
    for (std::size_t e = 0; e < n_edges; ++e) {
      const auto at = tok.begin() + static_cast<std::ptrdiff_t>(1 + e * period);
      std::vector<Token> va(at, at + static_cast<std::ptrdiff_t>(nv));
      if (e > 0) {
        ++later_edges;
        if (seen.count(va)) ++repeats;
      }
      seen.insert(std::move(va));
      seen.insert(std::vector<Token>(at + static_cast<std::ptrdiff_t>(nv), at + static_cast<std::ptrdiff_t>(2 * nv)));
    }
  }

  NGramPrior m;
  m.category_ = cat;
  m.order_ = order;
  m.alpha_ = alpha;
  // Smoothed so that a corpus without repeats never rules out fresh vertices.
  m.copy_weight_ = static_cast<double>(repeats) / static_cast<double>(later_edges + 1);
  if (order > 0 && corpus.size() >= 10) {
    Entries fit;
    reserve(fit, 9);
    std::vector<TokenSeq> held;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (i % 10 == 9) {
        held.push_back(corpus[i]);
      } else {
        count_into(corpus[i], fit);
      }
    }
    m.build_table(fit);
    m.fit_weights(held);
  }
  Entries all;
  reserve(all, 10);
  for (const TokenSeq& seq : corpus) count_into(seq, all);
  m.build_table(all);
  return m;
}

/// exp of the mean negative log-likelihood of every token after BOS.
inline double perplexity(const SequencePrior& prior, const std::vector<TokenSeq>& corpus) {
  double nll = 0.0;
  std::size_t count = 0;
  std::vector<double> dist;
  for (const TokenSeq& seq : corpus) {
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
      prior.next_dist(std::span<const Token>(seq.tokens.data(), i), dist);
      nll -= std::log(dist[seq.tokens[i]]);
      ++count;
    }
  }
  return count == 0 ? 1.0 : std::exp(nll / static_cast<double>(count));
}

// -----------------------------------------------------------------------------
// Sampling

struct SamplingParams {
  int top_k = 50;
  double top_p = 0.95;
  double temperature = 1.0;
};

/// Temperature-scales the distribution, keeps the top-k ids, then the
/// smallest prefix of those (renormalized, sorted by probability) whose mass
/// reaches top_p, and samples from what is left. Ties order by lower id.
inline Token sample_topk_topp(std::span<const double> dist, const SamplingParams& sp, CounterRng& rng) {
  thread_local std::vector<std::pair<double, Token>> cand;
  cand.clear();
  double pmax = 0.0;
  for (std::size_t t = 0; t < dist.size(); ++t) {
    if (dist[t] > 0.0) {
      cand.push_back({dist[t], static_cast<Token>(t)});
      pmax = std::max(pmax, dist[t]);
    }
  }
  if (cand.empty()) throw Error(ErrorCode::kMalformedSequence, "sampling from an empty distribution");
  auto by_weight = [](const auto& l, const auto& r) { return l.first != r.first ? l.first > r.first : l.second < r.second; };

  if (sp.temperature <= 0.0) {
    return std::min_element(cand.begin(), cand.end(), by_weight)->second;
  }
  if (sp.temperature != 1.0) {
    const double log_max = std::log(pmax);
    for (auto& c : cand) c.first = std::exp((std::log(c.first) - log_max) / sp.temperature);
  }
  const std::size_t k = std::min(cand.size(), static_cast<std::size_t>(std::max(1, sp.top_k)));
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), by_weight);

  double kept_mass = 0.0;
  for (std::size_t i = 0; i < k; ++i) kept_mass += cand[i].first;
  std::size_t keep = k;
  if (sp.top_p < 1.0) {
    double cum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      cum += cand[i].first;
      if (cum >= sp.top_p * kept_mass) {
        keep = i + 1;
        break;
      }
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) total += cand[i].first;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < keep; ++i) {
    u -= cand[i].first;
    if (u < 0.0) return cand[i].second;
  }
  return cand[keep - 1].second;
}

/// A sampled continuation: either EOS or exactly p edge tokens.
struct EdgeProposal {
  bool terminal = false;
  std::vector<Token> tokens;

  friend bool operator==(const EdgeProposal&, const EdgeProposal&) = default;
};

/// Extends `seq` in place by one edge (SPLIT included when needed) or EOS.
/// `seq` must end at BOS, after a complete edge, or after SPLIT.
inline EdgeProposal extend_with_edge(const SequencePrior& prior, std::vector<Token>& seq, const SamplingParams& sp,
                                     CounterRng& rng) {
  const CategorySchema& schema = prior.schema();
  thread_local std::vector<double> dist;
  EdgeProposal out;
  const NextPosition pos = next_position(schema, seq);
  const bool at_boundary = pos.kind == NextPosition::kBoundary || pos.kind == NextPosition::kFirst;
  if (!at_boundary && !(pos.kind == NextPosition::kSlot && pos.slot == 0)) {
    throw Error(ErrorCode::kMalformedSequence, "sample_edge: prefix does not end at an edge boundary");
  }
  if (at_boundary) {
    prior.next_dist(seq, dist);
    const Token t = sample_topk_topp(dist, sp, rng);
    seq.push_back(t);
    if (t == schema.eos()) {
      out.terminal = true;
      return out;
    }
    if (t != schema.split()) out.tokens.push_back(t);
  }
  while (static_cast<int>(out.tokens.size()) < schema.p()) {
    prior.next_dist(seq, dist);
    const Token t = sample_topk_topp(dist, sp, rng);
    seq.push_back(t);
    out.tokens.push_back(t);
  }
  return out;
}

inline EdgeProposal sample_edge(const SequencePrior& prior, std::span<const Token> prefix, const SamplingParams& sp,
                                CounterRng& rng) {
  std::vector<Token> work(prefix.begin(), prefix.end());
  return extend_with_edge(prior, work, sp, rng);
}

/// Tokens a proposal appends to `prefix` (SPLIT first unless the prefix ends at BOS).
inline std::vector<Token> proposal_tokens(const CategorySchema& schema, std::span<const Token> prefix,
                                          const EdgeProposal& e) {
  if (e.terminal) return {schema.eos()};
  std::vector<Token> out;
  if (next_position(schema, prefix).kind == NextPosition::kBoundary) out.push_back(schema.split());
  out.insert(out.end(), e.tokens.begin(), e.tokens.end());
  return out;
}

/// Log-probability of a proposal under the untruncated prior.
inline double proposal_log_prob(const SequencePrior& prior, std::span<const Token> prefix, const EdgeProposal& e) {
  std::vector<Token> work(prefix.begin(), prefix.end());
  std::vector<double> dist;
  double lp = 0.0;
  for (const Token t : proposal_tokens(prior.schema(), prefix, e)) {
    prior.next_dist(work, dist);
    lp += std::log(dist[t]);
    work.push_back(t);
  }
  return lp;
}

}  // namespace procgraph
