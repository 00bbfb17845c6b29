// Copyright 2026 The primflow Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "primflow/core/serialize.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "primflow/core/error.h"

namespace primflow {
namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
}

// Wraps field access so missing or mistyped fields surface as ConfigParse.
template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, std::string(key) + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key);
}

json node_to_json(const PrimitiveNode& n) {
  const auto& m = n.meta;
  json prompt = json::array();
  for (const auto& s : m.prompt) {
    prompt.push_back({{"name", s.name}, {"tokens", s.tokens}, {"key", s.key}});
  }
  return json{
      {"id", n.node_id},
      {"kind", kind_name(n.kind)},
      {"inputs", m.inputs},
      {"outputs", m.outputs},
      {"engine", m.engine_id},
      {"batch_items", m.batch_items},
      {"output_items", m.output_items},
      {"prompt", prompt},
      {"decode_tokens", m.decode_tokens},
      {"prefix_tokens", m.prefix_tokens},
      {"cached_prefix_tokens", m.cached_prefix_tokens},
      {"batchable", m.batchable},
      {"splittable", m.splittable},
      {"output_segments", m.output_segments},
      {"payload_tokens", m.payload_tokens},
      {"query_id", m.query_id},
      {"app_id", m.app_id},
      {"component", m.component},
      {"stage_of", m.stage_of},
      {"stage_index", m.stage_index},
      {"condition", m.condition},
      {"condition_value", m.condition_value},
  };
}

PrimitiveNode node_from_json(const json& j) {
  PrimitiveNode n;
  n.node_id = get<std::string>(j, "id");
  auto kind = parse_kind(get<std::string>(j, "kind"));
  if (!kind) throw Error(ErrorCode::kConfigParse, "unknown kind in " + n.node_id);
  n.kind = *kind;
  auto& m = n.meta;
  m.inputs = get_or<std::vector<std::string>>(j, "inputs", {});
  m.outputs = get_or<std::vector<std::string>>(j, "outputs", {});
  m.engine_id = get_or<std::string>(j, "engine", "");
  m.batch_items = get_or<std::int64_t>(j, "batch_items", 1);
  m.output_items = get_or<std::int64_t>(j, "output_items", 1);
  if (j.contains("prompt")) {
    for (const auto& s : j.at("prompt")) {
      m.prompt.push_back({get<std::string>(s, "name"),
                          get<std::int64_t>(s, "tokens"),
                          get_or<std::string>(s, "key", "")});
    }
  }
  m.decode_tokens = get_or<std::int64_t>(j, "decode_tokens", 0);
  m.prefix_tokens = get_or<std::int64_t>(j, "prefix_tokens", 0);
  m.cached_prefix_tokens = get_or<std::int64_t>(j, "cached_prefix_tokens", 0);
  m.batchable = get_or<bool>(j, "batchable", false);
  m.splittable = get_or<bool>(j, "splittable", false);
  m.output_segments = get_or<std::int64_t>(j, "output_segments", 1);
  m.payload_tokens = get_or<std::int64_t>(j, "payload_tokens", 0);
  m.query_id = get_or<std::string>(j, "query_id", "");
  m.app_id = get_or<std::string>(j, "app_id", "");
  m.component = get_or<std::string>(j, "component", "");
  m.stage_of = get_or<std::string>(j, "stage_of", "");
  m.stage_index = get_or<int>(j, "stage_index", -1);
  m.condition = get_or<std::string>(j, "condition", "");
  m.condition_value = get_or<bool>(j, "condition_value", false);
  return n;
}

json pgraph_to_json(const PGraph& g) {
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) nodes.push_back(node_to_json(n));
  json edges = json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"key", e.key}});
  }
  return json{{"query_id", g.query_id},
              {"app_id", g.app_id},
              {"external_inputs", g.external_inputs},
              {"nodes", nodes},
              {"edges", edges}};
}

PGraph pgraph_from_json(const json& j) {
  PGraph g;
  g.query_id = get_or<std::string>(j, "query_id", "");
  g.app_id = get_or<std::string>(j, "app_id", "");
  g.external_inputs =
      get_or<std::set<std::string>>(j, "external_inputs", {});
  if (!j.contains("nodes")) throw Error(ErrorCode::kConfigParse, "no nodes");
  for (const auto& n : j.at("nodes")) g.add_node(node_from_json(n));
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      g.add_edge({get<std::string>(e, "from"), get<std::string>(e, "to"),
                  get_or<std::string>(e, "key", "")});
    }
  }
  return g;
}

}  // namespace

std::string serialize_pgraph(const PGraph& g) { return dump(pgraph_to_json(g)); }

std::string serialize_egraph(const EGraph& e) {
  json j = pgraph_to_json(e.graph);
  j["depth"] = e.depth;
  j["provenance"] = e.provenance;
  return dump(j);
}

PGraph parse_pgraph(std::string_view text) {
  return pgraph_from_json(parse_text(text));
}

EGraph parse_egraph(std::string_view text) {
  json j = parse_text(text);
  EGraph e;
  e.graph = pgraph_from_json(j);
  e.depth = get_or<std::map<std::string, int>>(j, "depth", {});
  e.provenance = get_or<std::vector<std::string>>(j, "provenance", {});
  return e;
}

std::string serialize_template(const WorkflowTemplate& t) {
  json comps = json::array();
  for (const auto& c : t.components) {
    comps.push_back({{"name", c.name},
                     {"role", role_name(c.role)},
                     {"engine", c.engine_id},
                     {"aux_engine", c.aux_engine_id},
                     {"in_kwargs", c.in_kwargs},
                     {"out_kwargs", c.out_kwargs},
                     {"batchable", c.batchable},
                     {"splittable", c.splittable},
                     {"guard", c.guard},
                     {"condition", c.condition}});
  }
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back(json::array({a, b}));
  return dump(json{{"id", t.id},
                   {"inputs", t.inputs},
                   {"components", comps},
                   {"edges", edges}});
}

WorkflowTemplate parse_template(std::string_view text) {
  json j = parse_text(text);
  WorkflowTemplate t;
  t.id = get<std::string>(j, "id");
  t.inputs = get_or<std::vector<std::string>>(j, "inputs", {});
  for (const auto& cj : j.at("components")) {
    Component c;
    c.name = get<std::string>(cj, "name");
    auto role = parse_role(get<std::string>(cj, "role"));
    if (!role) {
      throw Error(ErrorCode::kUnknownRoleKind,
                  c.name + ": role '" + get<std::string>(cj, "role") + "'");
    }
    c.role = *role;
    c.engine_id = get<std::string>(cj, "engine");
    c.aux_engine_id = get_or<std::string>(cj, "aux_engine", "");
    c.in_kwargs = get_or<std::vector<std::string>>(cj, "in_kwargs", {});
    c.out_kwargs = get_or<std::vector<std::string>>(cj, "out_kwargs", {});
    c.batchable = get_or<bool>(cj, "batchable", false);
    c.splittable = get_or<bool>(cj, "splittable", false);
    c.guard = get_or<std::string>(cj, "guard", "");
    c.condition = get_or<std::string>(cj, "condition", "");
    t.components.push_back(std::move(c));
  }
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorCode::kConfigParse, "template edge must be a pair");
      }
      t.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
  }
  return t;
}

namespace {

json config_to_json(const QueryConfig& c) {
  json comps = json::object();
  for (const auto& [name, cc] : c.components) {
    json cj = {{"params", cc.params}};
    if (!cc.synthesis_mode.empty()) cj["synthesis_mode"] = cc.synthesis_mode;
    comps[name] = cj;
  }
  return json{{"query_id", c.query_id},
              {"app_id", c.app_id},
              {"components", comps},
              {"conditions", c.conditions}};
}

}  // namespace

std::string serialize_config(const QueryConfig& c) {
  return dump(config_to_json(c));
}

QueryConfig parse_config(std::string_view text) {
  json j = parse_text(text);
  QueryConfig c;
  c.query_id = get_or<std::string>(j, "query_id", "");
  c.app_id = get_or<std::string>(j, "app_id", "");
  if (j.contains("components")) {
    for (const auto& [name, cj] : j.at("components").items()) {
      ComponentConfig cc;
      cc.params = get_or<std::map<std::string, std::int64_t>>(cj, "params", {});
      cc.synthesis_mode = get_or<std::string>(cj, "synthesis_mode", "");
      c.components[name] = std::move(cc);
    }
  }
  c.conditions = get_or<std::map<std::string, bool>>(j, "conditions", {});
  return c;
}

std::string config_fingerprint_text(const QueryConfig& c) {
  json j = config_to_json(c);
  j.erase("query_id");
  j.erase("app_id");
  return j.dump();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + path);
}

}  // namespace primflow
