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


#include "scenarios.h"

#include <algorithm>

#include "primflow/workloads/apps.h"

#ifndef PRIMFLOW_SOURCE_DIR
#error "PRIMFLOW_SOURCE_DIR must point at the repository root"
#endif

namespace primflow::testing {
namespace {

std::int64_t uniform(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) {
  return std::bernoulli_distribution(p)(rng);
}

EGraph finish(PGraph g, const std::string& query) {
  g.query_id = query;
  g.app_id = "two-query";
  g.external_inputs = {"question"};
  for (auto& [id, n] : g.nodes) {
    n.meta.query_id = query;
    n.meta.app_id = g.app_id;
  }
  EGraph e;
  e.depth = assign_depths(g);
  e.graph = std::move(g);
  return e;
}

// deep -> mid -> join -> sink, shallow -> join, slow -> join
EGraph two_query_graph(const std::string& query, const std::string& deep,
                       const std::string& mid, const std::string& shallow,
                       const std::string& slow, const std::string& join,
                       const std::string& sink) {
  PGraph g;
  auto k = [](const std::string& n) { return "out_" + n; };
  g.add_node(make_node(deep, PrimitiveKind::kPrefilling, "llm", {"question"},
                       {k(deep)}, 512));
  g.add_node(make_node(shallow, PrimitiveKind::kPrefilling, "llm",
                       {"question"}, {k(shallow)}, 512));
  g.add_node(make_node(mid, PrimitiveKind::kReranking, "rerank", {k(deep)},
                       {k(mid)}));
  g.add_node(make_node(slow, PrimitiveKind::kSearching, "vectordb-search",
                       {"question"}, {k(slow)}));
  g.add_node(make_node(join, PrimitiveKind::kReranking, "rerank",
                       {k(mid), k(shallow), k(slow)}, {k(join)}));
  g.add_node(make_node(sink, PrimitiveKind::kReranking, "rerank", {k(join)},
                       {"answer"}));
  g.add_edge({deep, mid, k(deep)});
  g.add_edge({mid, join, k(mid)});
  g.add_edge({shallow, join, k(shallow)});
  g.add_edge({slow, join, k(slow)});
  g.add_edge({join, sink, k(join)});
  return finish(std::move(g), query);
}

const std::vector<std::string> kLlmEngines = {"llm", "llm-small"};

}  // namespace

std::string config_path(const std::string& relative) {
  return std::string(PRIMFLOW_SOURCE_DIR) + "/configs/" + relative;
}

std::string data_path(const std::string& relative) {
  return std::string(PRIMFLOW_SOURCE_DIR) + "/tests/data/" + relative;
}

CommModel zero_comm() {
  CommModel c;
  c.hop_ms = 0;
  c.per_token_ms = 0;
  c.preschedule = false;
  return c;
}

PrimitiveNode make_node(const std::string& id, PrimitiveKind kind,
                        const std::string& engine,
                        std::vector<std::string> inputs,
                        std::vector<std::string> outputs,
                        std::int64_t prompt_tokens) {
  PrimitiveNode n;
  n.node_id = id;
  n.kind = kind;
  n.meta.engine_id = engine;
  n.meta.inputs = std::move(inputs);
  n.meta.outputs = std::move(outputs);
  n.meta.component = id;
  if (prompt_tokens > 0) {
    n.meta.prompt = {{"prompt", prompt_tokens, ""}};
  }
  return n;
}

TwoQueryScenario two_query_scenario() {
  TwoQueryScenario s;
  s.q1 = two_query_graph("q1", "A", "C", "B", "D", "E", "F");
  s.q2 = two_query_graph("q2", "H", "I", "G", "J", "K", "L");
  s.prefills = {"q1/A", "q1/B", "q2/G", "q2/H"};
  return s;
}

std::vector<QueueEntry> two_query_queue(const TwoQueryScenario& s) {
  std::vector<QueueEntry> q;
  std::uint64_t seq = 0;
  for (const EGraph* e : {&s.q1, &s.q2}) {
    for (const auto& [id, n] : e->graph.nodes) {
      if (n.kind != PrimitiveKind::kPrefilling) continue;
      QueueEntry entry;
      entry.query_id = e->graph.query_id;
      entry.node_id = id;
      entry.kind = n.kind;
      entry.depth = e->depth.at(id);
      entry.remaining = 1;
      entry.load_per_request = n.load_per_request();
      entry.seq = seq++;
      q.push_back(entry);
    }
  }
  return q;
}

std::map<std::string, double> evaluate_two_step(
    const TwoQueryScenario& s, const std::vector<std::string>& first,
    const std::vector<std::string>& second) {
  // Durations stated for the scenario, not read from any profile.
  auto llm_batch_ms = [](std::size_t n) { return n == 2 ? 800.0 : 500.0; };
  std::map<std::string, double> llm_done;
  double t1 = llm_batch_ms(first.size());
  double t2 = t1 + llm_batch_ms(second.size());
  for (const auto& n : first) llm_done[n] = t1;
  for (const auto& n : second) llm_done[n] = t2;

  std::map<std::string, double> out;
  for (const EGraph* e : {&s.q1, &s.q2}) {
    const PGraph& g = e->graph;
    std::map<std::string, double> done;
    for (const auto& id : topo_sort(g)) {
      const auto& n = g.node(id);
      if (n.kind == PrimitiveKind::kPrefilling) {
        done[id] = llm_done.at(g.query_id + "/" + id);
        continue;
      }
      double ready = 0;
      for (const auto& p : g.parents(id)) ready = std::max(ready, done[p]);
      double dur = n.kind == PrimitiveKind::kSearching ? 1600.0 : 500.0;
      done[id] = ready + dur;
    }
    double makespan = 0;
    for (const auto& [id, t] : done) makespan = std::max(makespan, t);
    out[g.query_id] = makespan;
  }
  return out;
}

ProfileSet fuzz_profiles() { return default_profiles(); }

FuzzCase fuzz_case(std::mt19937_64& rng, int index) {
  FuzzCase fc;
  WorkflowTemplate& t = fc.tmpl;
  QueryConfig& c = fc.config;
  t.id = "fuzz-" + std::to_string(index);
  t.inputs = {"question", "documents"};
  c.query_id = "f" + std::to_string(index);
  c.app_id = t.id;

  const int count = static_cast<int>(uniform(rng, 1, 7));
  std::vector<std::string> keys = t.inputs;
  std::map<std::string, std::string> producer;
  std::vector<std::string> conditions;

  for (int i = 0; i < count; ++i) {
    Component comp;
    comp.name = "c" + std::to_string(i);
    comp.role = static_cast<RoleKind>(uniform(rng, 0, 8));
    switch (comp.role) {
      case RoleKind::kIndexing:
        comp.engine_id = "embedding";
        comp.aux_engine_id = "vectordb-ingest";
        break;
      case RoleKind::kQueryEmbedding: comp.engine_id = "embedding"; break;
      case RoleKind::kSearch:
        comp.engine_id = coin(rng, 0.5) ? "vectordb-search" : "web-search";
        break;
      case RoleKind::kRerank: comp.engine_id = "rerank"; break;
      case RoleKind::kToolCall: comp.engine_id = "tools"; break;
      case RoleKind::kContextualize: comp.engine_id = "llm-small"; break;
      default:
        comp.engine_id = kLlmEngines[uniform(rng, 0, 1)];
        break;
    }
    comp.batchable = coin(rng, 0.6);
    comp.splittable = coin(rng, 0.5);

    // Synthesize keeps the question first so its prompt is well formed.
    std::vector<std::string> in;
    if (comp.role == RoleKind::kLlmSynthesize) {
      in.push_back("question");
      if (keys.size() > 2 && coin(rng, 0.8)) {
        in.push_back(keys[uniform(rng, 2, keys.size() - 1)]);
      }
    } else {
      std::size_t n_in = static_cast<std::size_t>(uniform(rng, 1, 2));
      for (std::size_t j = 0; j < n_in; ++j) {
        const auto& k = keys[uniform(rng, 0, keys.size() - 1)];
        if (std::find(in.begin(), in.end(), k) == in.end()) in.push_back(k);
      }
    }
    comp.in_kwargs = in;
    comp.out_kwargs = {"k" + std::to_string(i)};

    if (comp.role == RoleKind::kProxyJudge && coin(rng, 0.5)) {
      comp.condition = "flag" + std::to_string(i);
      conditions.push_back(comp.condition);
      c.conditions[comp.condition] = coin(rng, 0.5);
    } else if (!conditions.empty() && comp.role != RoleKind::kLlmSynthesize &&
               coin(rng, 0.3)) {
      comp.guard = conditions[uniform(rng, 0, conditions.size() - 1)];
      comp.in_kwargs.push_back(comp.guard);
    }

    auto& params = c.components[comp.name].params;
    params = {
        {"chunk_count", uniform(rng, 1, 64)},
        {"chunk_tokens", uniform(rng, 32, 300)},
        {"query_count", uniform(rng, 1, 4)},
        {"query_tokens", uniform(rng, 8, 40)},
        {"top_k", uniform(rng, 1, 8)},
        {"candidates", uniform(rng, 1, 32)},
        {"call_count", uniform(rng, 1, 4)},
        {"result_tokens", uniform(rng, 16, 128)},
        {"instruction_tokens", uniform(rng, 16, 160)},
        {"question_tokens", uniform(rng, 8, 64)},
        {"answer_tokens", uniform(rng, 4, 64)},
        {"expansion_count", uniform(rng, 1, 4)},
        {"context_count", uniform(rng, 1, 4)},
        {"refine_instruction_tokens", uniform(rng, 16, 160)},
        {"neighbor_count", uniform(rng, 1, 4)},
        {"context_tokens", uniform(rng, 8, 48)},
    };
    for (const auto& k : comp.in_kwargs) {
      params[k + "_tokens"] = uniform(rng, 8, 64);
    }
    if (comp.role == RoleKind::kLlmSynthesize) {
      static const char* kModes[] = {"refine", "tree", "oneshot"};
      c.components[comp.name].synthesis_mode = kModes[uniform(rng, 0, 2)];
    }

    // Producers of consumed keys become template predecessors, plus a few
    // ordering-only edges.
    for (const auto& k : comp.in_kwargs) {
      auto it = producer.find(k);
      if (it != producer.end()) t.edges.emplace_back(it->second, comp.name);
    }
    for (int j = 0; j < i; ++j) {
      if (coin(rng, 0.2)) {
        t.edges.emplace_back("c" + std::to_string(j), comp.name);
      }
    }
    for (const auto& k : comp.out_kwargs) {
      keys.push_back(k);
      producer[k] = comp.name;
    }
    if (!comp.condition.empty()) producer[comp.condition] = comp.name;
    t.components.push_back(std::move(comp));
  }
  std::sort(t.edges.begin(), t.edges.end());
  t.edges.erase(std::unique(t.edges.begin(), t.edges.end()), t.edges.end());
  return fc;
}

}  // namespace primflow::testing
