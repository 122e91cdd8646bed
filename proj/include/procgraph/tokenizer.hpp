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

#include <cstdint>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "procgraph/graph.hpp"
#include "procgraph/graph_io.hpp"
#include "procgraph/quantize.hpp"

namespace procgraph {

using Token = std::int32_t;

enum class SlotKind { x, y, z, radius, v_semantic, force_sign, e_semantic, cem_type };

inline bool is_categorical(SlotKind k) { return k >= SlotKind::v_semantic; }

inline int table_size(SlotKind k) {
  switch (k) {
    case SlotKind::v_semantic: return 3;
    case SlotKind::force_sign: return 2;
    case SlotKind::e_semantic: return 3;
    case SlotKind::cem_type: return 2;
    default: return 0;
  }
}

enum class Traversal { dfs, bfs };

struct TokenRange {
  Token lo = 0;  // inclusive
  Token hi = 0;  // exclusive

  bool contains(Token t) const { return t >= lo && t < hi; }
  int size() const { return hi - lo; }
};

/// Fixed token layout of one category. Categorical tables are packed after
/// the 128 continuous bins in order of first appearance in the slot list;
/// SPLIT, BOS and EOS follow.
class CategorySchema {
 public:
  static const CategorySchema& get(Category c) {
    static const CategorySchema cactus(Category::cactus, {SlotKind::x, SlotKind::y, SlotKind::z, SlotKind::radius}, {},
                                       Traversal::dfs);
    static const CategorySchema tree(Category::tree, {SlotKind::x, SlotKind::y, SlotKind::z}, {}, Traversal::dfs);
    static const CategorySchema bridge(Category::bridge,
                                       {SlotKind::x, SlotKind::y, SlotKind::z, SlotKind::v_semantic},
                                       {SlotKind::force_sign, SlotKind::e_semantic, SlotKind::cem_type},
                                       Traversal::bfs);
    switch (c) {
      case Category::cactus: return cactus;
      case Category::tree: return tree;
      case Category::bridge: return bridge;
    }
    return cactus;
  }

  Category category() const { return category_; }
  Traversal traversal() const { return traversal_; }
  const std::vector<SlotKind>& vertex_slots() const { return vertex_slots_; }
  const std::vector<SlotKind>& edge_slots() const { return edge_slots_; }

  /// Tokens per edge: 2 * |vertex slots| + |edge slots|.
  int p() const { return static_cast<int>(slots_.size()); }
  SlotKind slot(int i) const { return slots_[i]; }
  const std::vector<SlotKind>& slots() const { return slots_; }

  int categorical_classes() const { return n_cat_; }
  Token split() const { return kBins + n_cat_; }
  Token bos() const { return split() + 1; }
  Token eos() const { return split() + 2; }
  int vocab_size() const { return kBins + n_cat_ + 3; }

  /// Admissible id range of edge slot i.
  TokenRange slot_range(int i) const { return range_of(slots_[i]); }

  TokenRange range_of(SlotKind k) const {
    if (!is_categorical(k)) return {0, kBins};
    const Token start = table_start_.at(k);
    return {start, start + table_size(k)};
  }

 private:
  CategorySchema(Category c, std::vector<SlotKind> vslots, std::vector<SlotKind> eslots, Traversal t)
      : category_(c), traversal_(t), vertex_slots_(std::move(vslots)), edge_slots_(std::move(eslots)) {
    slots_ = vertex_slots_;
    slots_.insert(slots_.end(), vertex_slots_.begin(), vertex_slots_.end());
    slots_.insert(slots_.end(), edge_slots_.begin(), edge_slots_.end());
    Token next = kBins;
    for (const SlotKind k : slots_) {
      if (is_categorical(k) && !table_start_.count(k)) {
        table_start_[k] = next;
        next += table_size(k);
      }
    }
    n_cat_ = next - kBins;
  }

  Category category_;
  Traversal traversal_;
  std::vector<SlotKind> vertex_slots_;
  std::vector<SlotKind> edge_slots_;
  std::vector<SlotKind> slots_;
  std::map<SlotKind, Token> table_start_;
  int n_cat_ = 0;
};

struct TokenSeq {
  Category category = Category::cactus;
  std::vector<Token> tokens;

  const CategorySchema& schema() const { return CategorySchema::get(category); }
  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

// -----------------------------------------------------------------------------
// Sequence structure

/// What the next token of a prefix must be.
///   kStart     - empty prefix, only BOS
///   kFirst     - right after BOS: first slot of an edge, or EOS
///   kSlot      - slot `slot` of an edge
///   kBoundary  - after a complete edge: SPLIT or EOS
///   kDone      - prefix already ends with EOS
struct NextPosition {
  enum Kind { kStart, kFirst, kSlot, kBoundary, kDone } kind = kStart;
  int slot = 0;

  /// Dense id used to key per-position statistics: slots 0..p-1, then
  /// boundary = p, first = p + 1.
  int class_id(int p) const {
    switch (kind) {
      case kSlot: return slot;
      case kBoundary: return p;
      case kFirst: return p + 1;
      default: return p + 2;
    }
  }
};

/// Classifies the position after `prefix`, assuming the prefix is well formed.
inline NextPosition next_position(const CategorySchema& schema, std::span<const Token> prefix) {
  if (prefix.empty()) return {NextPosition::kStart, 0};
  if (prefix.back() == schema.eos()) return {NextPosition::kDone, 0};
  const std::size_t j = prefix.size() - 1;  // tokens after BOS
  if (j == 0) return {NextPosition::kFirst, 0};
  const int period = schema.p() + 1;
  const int r = static_cast<int>(j % period);
  if (r == schema.p()) return {NextPosition::kBoundary, 0};
  return {NextPosition::kSlot, r};
}

inline std::size_t sequence_length(const CategorySchema& schema, std::size_t edges) {
  return edges == 0 ? 2 : 2 + edges * schema.p() + (edges - 1);
}

// -----------------------------------------------------------------------------
// Encoding

namespace detail {

inline Token vertex_slot_token(const CategorySchema& schema, SlotKind k, const Vertex& v) {
  switch (k) {
    case SlotKind::x: return quantize(v.pos.x);
    case SlotKind::y: return quantize(v.pos.y);
    case SlotKind::z: return quantize(v.pos.z);
    case SlotKind::radius: return quantize(v.radius.value_or(0.0));
    case SlotKind::v_semantic:
      return schema.range_of(k).lo + static_cast<Token>(v.semantic.value_or(VertexSemantic::deck));
    default: break;
  }
  throw Error(ErrorCode::kInvalidGraph, "edge slot used as vertex slot");
}

inline Token edge_slot_token(const CategorySchema& schema, SlotKind k, const Edge& e) {
  const Token lo = schema.range_of(k).lo;
  switch (k) {
    case SlotKind::force_sign: return lo + static_cast<Token>(e.force_sign.value_or(ForceSign::tension));
    case SlotKind::e_semantic: return lo + static_cast<Token>(e.e_semantic.value_or(EdgeSemantic::deck));
    case SlotKind::cem_type: return lo + static_cast<Token>(e.cem_type.value_or(CemType::trail));
    default: break;
  }
  throw Error(ErrorCode::kInvalidGraph, "vertex slot used as edge slot");
}

}  // namespace detail

inline std::vector<DirectedEdge> traverse(const ProcGraph& g, Traversal t) {
  return t == Traversal::dfs ? traverse_dfs(g) : traverse_bfs(g);
}

/// BOS, edges of p tokens in traversal order separated by SPLIT, EOS.
inline TokenSeq encode(const ProcGraph& g) {
  const CategorySchema& schema = CategorySchema::get(g.category);
  const auto report = validate(g, {.check_count_band = false});
  if (!report.ok()) {
    const Violation& v = report.violations.front();
    throw Error(ErrorCode::kInvalidGraph, std::string("encode: ") + std::string(to_string(v.kind)) +
                                              (v.index >= 0 ? " at " + std::to_string(v.index) : std::string()));
  }
  const auto order = traverse(g, schema.traversal());

  TokenSeq seq{g.category, {}};
  seq.tokens.reserve(sequence_length(schema, order.size()));
  seq.tokens.push_back(schema.bos());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) seq.tokens.push_back(schema.split());
    const DirectedEdge& de = order[i];
    for (const int endpoint : {de.from, de.to}) {
      for (const SlotKind k : schema.vertex_slots()) {
        seq.tokens.push_back(detail::vertex_slot_token(schema, k, g.vertices[endpoint]));
      }
    }
    for (const SlotKind k : schema.edge_slots()) {
      seq.tokens.push_back(detail::edge_slot_token(schema, k, g.edges[de.edge_index]));
    }
  }
  seq.tokens.push_back(schema.eos());
  return seq;
}

// -----------------------------------------------------------------------------
// Decoding

/// Checks slot classes of every token; returns the number of complete edges
/// and whether EOS terminates the sequence. Throws kMalformedSequence.
struct SequenceShape {
  std::size_t complete_edges = 0;
  bool terminated = false;
};

inline SequenceShape check_structure(const TokenSeq& t) {
  const CategorySchema& schema = t.schema();
  const auto& tok = t.tokens;
  if (tok.empty() || tok[0] != schema.bos()) {
    throw Error(ErrorCode::kMalformedSequence, "sequence must start with BOS");
  }
  SequenceShape shape;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    const NextPosition pos = next_position(schema, std::span<const Token>(tok.data(), i));
    const Token v = tok[i];
    auto fail = [i, v](const char* what) {
      throw Error(ErrorCode::kMalformedSequence,
                  "token " + std::to_string(v) + " at position " + std::to_string(i) + ": " + what);
    };
    switch (pos.kind) {
      case NextPosition::kDone:
        fail("tokens after EOS");
        break;
      case NextPosition::kFirst:
        if (v == schema.eos()) {
          shape.terminated = true;
        } else if (!schema.slot_range(0).contains(v)) {
          fail("expected first edge slot or EOS");
        }
        break;
      case NextPosition::kSlot:
        if (!schema.slot_range(pos.slot).contains(v)) fail("wrong slot class");
        if (pos.slot == schema.p() - 1) ++shape.complete_edges;
        break;
      case NextPosition::kBoundary:
        if (v == schema.eos()) {
          shape.terminated = true;
        } else if (v != schema.split()) {
          fail("expected SPLIT or EOS");
        }
        break;
      case NextPosition::kStart:
        fail("unexpected start");
        break;
    }
  }
  return shape;
}

/// Rebuilds a graph from a complete or partial sequence. Vertices are merged
/// by exact equality of their quantized slot tuple; an incomplete trailing
/// edge, duplicate edges and self-loops are dropped.
inline ProcGraph decode(const TokenSeq& t) {
  const CategorySchema& schema = t.schema();
  const SequenceShape shape = check_structure(t);
  const int nv = static_cast<int>(schema.vertex_slots().size());
  const int p = schema.p();

  ProcGraph g;
  g.category = t.category;
  std::map<std::vector<Token>, int> index_of;
  std::set<std::pair<int, int>> seen_edges;

  auto vertex_for = [&](std::span<const Token> tuple) {
    std::vector<Token> key(tuple.begin(), tuple.end());
    if (auto it = index_of.find(key); it != index_of.end()) return it->second;
    Vertex v;
    for (int s = 0; s < nv; ++s) {
      const SlotKind k = schema.vertex_slots()[s];
      const Token tok = tuple[s];
      switch (k) {
        case SlotKind::x: v.pos.x = dequantize(tok); break;
        case SlotKind::y: v.pos.y = dequantize(tok); break;
        case SlotKind::z: v.pos.z = dequantize(tok); break;
        case SlotKind::radius: v.radius = dequantize(tok); break;
        case SlotKind::v_semantic: v.semantic = static_cast<VertexSemantic>(tok - schema.range_of(k).lo); break;
        default: break;
      }
    }
    const int idx = static_cast<int>(g.vertices.size());
    g.vertices.push_back(v);
    index_of.emplace(std::move(key), idx);
    return idx;
  };

  for (std::size_t e = 0; e < shape.complete_edges; ++e) {
    const std::size_t start = 1 + e * (p + 1);
    const std::span<const Token> edge(t.tokens.data() + start, p);
    const auto tuple_a = edge.subspan(0, nv);
    const auto tuple_b = edge.subspan(nv, nv);
    if (std::equal(tuple_a.begin(), tuple_a.end(), tuple_b.begin())) continue;
    const int a = vertex_for(tuple_a);
    const int b = vertex_for(tuple_b);
    if (!seen_edges.insert(std::minmax(a, b)).second) continue;
    Edge out{a, b, {}, {}, {}};
    for (std::size_t s = 0; s < schema.edge_slots().size(); ++s) {
      const SlotKind k = schema.edge_slots()[s];
      const Token local = edge[2 * nv + s] - schema.range_of(k).lo;
      switch (k) {
        case SlotKind::force_sign: out.force_sign = static_cast<ForceSign>(local); break;
        case SlotKind::e_semantic: out.e_semantic = static_cast<EdgeSemantic>(local); break;
        case SlotKind::cem_type: out.cem_type = static_cast<CemType>(local); break;
        default: break;
      }
    }
    g.edges.push_back(out);
  }
  return g;
}

// -----------------------------------------------------------------------------
// Token corpus files

inline std::string corpus_header(Category c) {
  const CategorySchema& s = CategorySchema::get(c);
  return "#schema " + std::string(to_string(c)) + " p=" + std::to_string(s.p()) +
         " vocab=" + std::to_string(s.vocab_size());
}

inline std::string sequence_line(const TokenSeq& seq) {
  std::string line;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) line += ' ';
    line += std::to_string(seq.tokens[i]);
  }
  return line;
}

inline std::string corpus_to_string(Category c, const std::vector<TokenSeq>& corpus) {
  std::string out = corpus_header(c) + "\n";
  for (const TokenSeq& s : corpus) {
    if (s.category != c) throw Error(ErrorCode::kMixedSchema, "corpus mixes categories");
    out += sequence_line(s) + "\n";
  }
  return out;
}

struct Corpus {
  Category category = Category::cactus;
  std::vector<TokenSeq> sequences;
};

inline Corpus corpus_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("#schema ", 0) != 0) {
    throw Error(ErrorCode::kFormat, "token corpus must start with a #schema header");
  }
  std::istringstream header(line.substr(8));
  std::string cat, pfield, vfield;
  header >> cat >> pfield >> vfield;
  Corpus corpus;
  corpus.category = parse_category(cat);
  if (line != corpus_header(corpus.category)) {
    throw Error(ErrorCode::kSchemaMismatch, "header '" + line + "' does not match " +
                                               corpus_header(corpus.category));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      throw Error(ErrorCode::kMixedSchema, "second schema header inside corpus");
    }
    std::istringstream ls(line);
    TokenSeq seq{corpus.category, {}};
    long long v = 0;
    while (ls >> v) {
      if (v < 0 || v >= CategorySchema::get(corpus.category).vocab_size()) {
        throw Error(ErrorCode::kFormat, "token id " + std::to_string(v) + " outside vocabulary");
      }
      seq.tokens.push_back(static_cast<Token>(v));
    }
    if (!ls.eof()) throw Error(ErrorCode::kFormat, "non-numeric token in corpus line");
    check_structure(seq);
    corpus.sequences.push_back(std::move(seq));
  }
  return corpus;
}

}  // namespace procgraph
