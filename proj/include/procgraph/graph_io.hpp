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

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "procgraph/graph.hpp"

namespace procgraph {

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kFormat, where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known) throw Error(ErrorCode::kFormat, "unknown field '" + it.key() + "' in " + where);
  }
}

template <class Enum, std::size_t N>
Enum parse_label(const nlohmann::json& j, const std::array<const char*, N>& labels, const std::string& field) {
  const std::string s = j.get<std::string>();
  for (std::size_t i = 0; i < N; ++i) {
    if (s == labels[i]) return static_cast<Enum>(i);
  }
  throw Error(ErrorCode::kFormat, "bad value '" + s + "' for " + field);
}

inline constexpr std::array<const char*, 2> kForceLabels = {"tension", "compression"};
inline constexpr std::array<const char*, 3> kEdgeSemanticLabels = {"deck", "cable", "tower"};
inline constexpr std::array<const char*, 2> kCemLabels = {"trail", "deviation"};
inline constexpr std::array<const char*, 3> kVertexSemanticLabels = {"deck", "tower", "anchor"};

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::kFormat, field + " must be [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline nlohmann::json graph_to_json(const ProcGraph& g) {
  using nlohmann::json;
  json out = json::object();
  out["category"] = std::string(to_string(g.category));
  out["norm"] = {{"center", {g.norm.center.x, g.norm.center.y, g.norm.center.z}},
                 {"scale", g.norm.scale}};
  json verts = json::array();
  for (const Vertex& v : g.vertices) {
    json jv = {{"pos", {v.pos.x, v.pos.y, v.pos.z}}};
    if (v.radius) jv["radius"] = *v.radius;
    if (v.semantic) jv["semantic"] = detail::kVertexSemanticLabels[static_cast<int>(*v.semantic)];
    verts.push_back(std::move(jv));
  }
  out["vertices"] = std::move(verts);
  json edges = json::array();
  for (const Edge& e : g.edges) {
    json je = {{"a", e.a}, {"b", e.b}};
    if (e.force_sign) je["force_sign"] = detail::kForceLabels[static_cast<int>(*e.force_sign)];
    if (e.e_semantic) je["e_semantic"] = detail::kEdgeSemanticLabels[static_cast<int>(*e.e_semantic)];
    if (e.cem_type) je["cem_type"] = detail::kCemLabels[static_cast<int>(*e.cem_type)];
    edges.push_back(std::move(je));
  }
  out["edges"] = std::move(edges);
  return out;
}

inline ProcGraph graph_from_json(const nlohmann::json& j) {
  using detail::reject_unknown_keys;
  reject_unknown_keys(j, {"category", "norm", "vertices", "edges"}, "graph");
  try {
    ProcGraph g;
    g.category = parse_category(j.at("category").get<std::string>());
    const auto& norm = j.at("norm");
    reject_unknown_keys(norm, {"center", "scale"}, "norm");
    g.norm.center = detail::parse_vec3(norm.at("center"), "norm.center");
    g.norm.scale = norm.at("scale").get<double>();
    if (!(g.norm.scale > 0.0)) throw Error(ErrorCode::kFormat, "norm.scale must be positive");
    for (const auto& jv : j.at("vertices")) {
      reject_unknown_keys(jv, {"pos", "radius", "semantic"}, "vertex");
      Vertex v;
      v.pos = detail::parse_vec3(jv.at("pos"), "pos");
      if (jv.contains("radius")) v.radius = jv["radius"].get<double>();
      if (jv.contains("semantic")) {
        v.semantic = detail::parse_label<VertexSemantic>(jv["semantic"], detail::kVertexSemanticLabels, "semantic");
      }
      g.vertices.push_back(v);
    }
    for (const auto& je : j.at("edges")) {
      reject_unknown_keys(je, {"a", "b", "force_sign", "e_semantic", "cem_type"}, "edge");
      Edge e;
      e.a = je.at("a").get<int>();
      e.b = je.at("b").get<int>();
      if (je.contains("force_sign")) {
        e.force_sign = detail::parse_label<ForceSign>(je["force_sign"], detail::kForceLabels, "force_sign");
      }
      if (je.contains("e_semantic")) {
        e.e_semantic = detail::parse_label<EdgeSemantic>(je["e_semantic"], detail::kEdgeSemanticLabels, "e_semantic");
      }
      if (je.contains("cem_type")) {
        e.cem_type = detail::parse_label<CemType>(je["cem_type"], detail::kCemLabels, "cem_type");
      }
      g.edges.push_back(e);
    }
    return g;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kFormat, std::string("graph: ") + ex.what());
  }
}

inline std::string graph_to_string(const ProcGraph& g) { return graph_to_json(g).dump(1) + "\n"; }

inline ProcGraph graph_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kFormat, std::string("graph: ") + ex.what());
  }
  return graph_from_json(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

inline void save_graph(const std::string& path, const ProcGraph& g) { write_text_file(path, graph_to_string(g)); }

inline ProcGraph load_graph(const std::string& path) {
  try {
    return graph_from_string(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIo) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace procgraph
