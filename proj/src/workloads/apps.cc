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


#include "primflow/workloads/apps.h"

#include "primflow/core/error.h"

namespace primflow {
namespace {

Component comp(std::string name, RoleKind role, std::string engine,
               std::vector<std::string> in, std::vector<std::string> out) {
  Component c;
  c.name = std::move(name);
  c.role = role;
  c.engine_id = std::move(engine);
  c.in_kwargs = std::move(in);
  c.out_kwargs = std::move(out);
  return c;
}

Component batchable(Component c) {
  c.batchable = true;
  return c;
}

Component splittable(Component c) {
  c.splittable = true;
  return c;
}

Component indexing(std::vector<std::string> in) {
  Component c = batchable(comp("indexing", RoleKind::kIndexing, "embedding",
                               std::move(in), {"index"}));
  c.aux_engine_id = "vectordb-ingest";
  return c;
}

void set(QueryConfig& cfg, const std::string& component,
         std::initializer_list<std::pair<const std::string, std::int64_t>> p) {
  auto& cc = cfg.components[component];
  for (const auto& [k, v] : p) cc.params[k] = v;
}

std::int64_t get(const QueryConfig& cfg, const std::string& component,
                 const std::string& name) {
  return cfg.param(component, name);
}

void put(QueryConfig& cfg, const std::string& component,
         const std::string& name, std::int64_t v) {
  cfg.components[component].params[name] = v;
}

EngineProfile profile(std::string id, EngineCategory cat,
                      std::vector<LatencyPoint> table, std::int64_t max_slots,
                      int instances = 1) {
  EngineProfile p;
  p.engine_id = std::move(id);
  p.category = cat;
  p.latency_table = std::move(table);
  p.max_slots = max_slots;
  p.instances = instances;
  return p;
}

}  // namespace

std::string_view app_name(AppKind app) {
  switch (app) {
    case AppKind::kSearchEngineGen: return "search-engine";
    case AppKind::kLlmAgent: return "llm-agent";
    case AppKind::kNaiveRagQa: return "naive-rag";
    case AppKind::kAdvancedRagQa: return "advanced-rag";
    case AppKind::kContextualRetrieval: return "contextual-retrieval";
  }
  return "?";
}

std::optional<AppKind> parse_app(std::string_view name) {
  for (auto a : kAllApps) {
    if (app_name(a) == name) return a;
  }
  return std::nullopt;
}

AppKind app_from_name(std::string_view name) {
  auto a = parse_app(name);
  if (!a) throw Error(ErrorCode::kUnknownApp, std::string(name));
  return *a;
}

// Templates declare modules as the chain an application developer writes;
// data keys carry the real dependencies that the optimizer recovers.
WorkflowTemplate build_app_template(AppKind app) {
  WorkflowTemplate t;
  t.id = std::string(app_name(app));
  switch (app) {
    case AppKind::kSearchEngineGen: {
      t.inputs = {"question"};
      t.components = {
          comp("proxy", RoleKind::kProxyJudge, "llm", {"question"},
               {"rewritten"}),
          comp("judge", RoleKind::kProxyJudge, "llm", {"rewritten"},
               {"verdict"}),
          batchable(comp("web_search", RoleKind::kSearch, "web-search",
                         {"rewritten", "needs_search"}, {"results"})),
          comp("synthesize", RoleKind::kLlmSynthesize, "llm",
               {"question", "results"}, {"answer"}),
      };
      t.components[1].condition = "needs_search";
      t.components[2].guard = "needs_search";
      t.edges = {{"proxy", "judge"},
                 {"judge", "web_search"},
                 {"web_search", "synthesize"}};
      break;
    }
    case AppKind::kLlmAgent: {
      t.inputs = {"question"};
      t.components = {
          splittable(comp("planner", RoleKind::kQueryExpansion, "llm",
                          {"question"}, {"plan"})),
          batchable(comp("tools", RoleKind::kToolCall, "tools", {"plan"},
                         {"observations"})),
          comp("responder", RoleKind::kLlmSynthesize, "llm",
               {"question", "observations"}, {"answer"}),
      };
      t.edges = {{"planner", "tools"}, {"tools", "responder"}};
      break;
    }
    case AppKind::kNaiveRagQa: {
      t.inputs = {"question", "documents"};
      t.components = {
          indexing({"documents"}),
          batchable(comp("query_embedding", RoleKind::kQueryEmbedding,
                         "embedding", {"question"}, {"query_vectors"})),
          batchable(comp("search", RoleKind::kSearch, "vectordb-search",
                         {"query_vectors", "index"}, {"top_chunks"})),
          comp("synthesize", RoleKind::kLlmSynthesize, "llm",
               {"question", "top_chunks"}, {"answer"}),
      };
      t.edges = {{"indexing", "query_embedding"},
                 {"query_embedding", "search"},
                 {"search", "synthesize"}};
      break;
    }
    case AppKind::kAdvancedRagQa: {
      t.inputs = {"question", "documents"};
      t.components = {
          indexing({"documents"}),
          splittable(comp("query_expansion", RoleKind::kQueryExpansion, "llm",
                          {"question"}, {"expanded"})),
          batchable(comp("query_embedding", RoleKind::kQueryEmbedding,
                         "embedding", {"expanded"}, {"query_vectors"})),
          batchable(comp("search", RoleKind::kSearch, "vectordb-search",
                         {"query_vectors", "index"}, {"candidates"})),
          comp("rerank", RoleKind::kRerank, "rerank",
               {"candidates", "question"}, {"top_chunks"}),
          comp("synthesize", RoleKind::kLlmSynthesize, "llm",
               {"question", "top_chunks"}, {"answer"}),
      };
      t.edges = {{"indexing", "query_expansion"},
                 {"query_expansion", "query_embedding"},
                 {"query_embedding", "search"},
                 {"search", "rerank"},
                 {"rerank", "synthesize"}};
      break;
    }
    case AppKind::kContextualRetrieval: {
      t.inputs = {"question", "documents"};
      t.components = {
          comp("contextualize", RoleKind::kContextualize, "llm-small",
               {"documents"}, {"contextualized"}),
          indexing({"contextualized"}),
          batchable(comp("query_embedding", RoleKind::kQueryEmbedding,
                         "embedding", {"question"}, {"query_vectors"})),
          batchable(comp("search", RoleKind::kSearch, "vectordb-search",
                         {"query_vectors", "index"}, {"candidates"})),
          comp("rerank", RoleKind::kRerank, "rerank",
               {"candidates", "question"}, {"top_chunks"}),
          comp("synthesize", RoleKind::kLlmSynthesize, "llm",
               {"question", "top_chunks"}, {"answer"}),
      };
      t.edges = {{"contextualize", "indexing"},
                 {"indexing", "query_embedding"},
                 {"query_embedding", "search"},
                 {"search", "rerank"},
                 {"rerank", "synthesize"}};
      break;
    }
  }
  return t;
}

QueryConfig default_app_config(AppKind app, const std::string& query_id) {
  QueryConfig c;
  c.query_id = query_id;
  c.app_id = std::string(app_name(app));
  switch (app) {
    case AppKind::kSearchEngineGen:
      set(c, "proxy",
          {{"instruction_tokens", 64}, {"question_tokens", 32},
           {"answer_tokens", 32}});
      set(c, "judge",
          {{"instruction_tokens", 48}, {"question_tokens", 32},
           {"answer_tokens", 4}});
      set(c, "web_search", {{"query_count", 1}, {"top_k", 4},
                            {"chunk_tokens", 200}});
      set(c, "synthesize",
          {{"instruction_tokens", 80}, {"question_tokens", 32},
           {"answer_tokens", 96}, {"context_count", 4},
           {"chunk_tokens", 200}});
      c.components["synthesize"].synthesis_mode = "oneshot";
      c.conditions["needs_search"] = true;
      break;
    case AppKind::kLlmAgent:
      set(c, "planner",
          {{"instruction_tokens", 96}, {"question_tokens", 32},
           {"expansion_count", 3}, {"query_tokens", 32}});
      set(c, "tools", {{"call_count", 3}, {"result_tokens", 64}});
      set(c, "responder",
          {{"instruction_tokens", 64}, {"question_tokens", 32},
           {"answer_tokens", 96}, {"context_count", 3},
           {"chunk_tokens", 64}});
      c.components["responder"].synthesis_mode = "oneshot";
      break;
    case AppKind::kNaiveRagQa:
      set(c, "indexing", {{"chunk_count", 48}, {"chunk_tokens", 256}});
      set(c, "query_embedding", {{"query_count", 1}, {"query_tokens", 32}});
      set(c, "search", {{"query_count", 1}, {"top_k", 3},
                        {"chunk_tokens", 256}});
      set(c, "synthesize",
          {{"instruction_tokens", 96}, {"question_tokens", 32},
           {"answer_tokens", 64}, {"context_count", 3},
           {"chunk_tokens", 256}});
      c.components["synthesize"].synthesis_mode = "tree";
      break;
    case AppKind::kAdvancedRagQa:
      set(c, "indexing", {{"chunk_count", 48}, {"chunk_tokens", 256}});
      set(c, "query_expansion",
          {{"instruction_tokens", 80}, {"question_tokens", 32},
           {"expansion_count", 3}, {"query_tokens", 24}});
      set(c, "query_embedding", {{"query_count", 3}, {"query_tokens", 24}});
      set(c, "search", {{"query_count", 3}, {"top_k", 16},
                        {"chunk_tokens", 256}});
      set(c, "rerank", {{"candidates", 48}, {"top_k", 3},
                        {"chunk_tokens", 256}});
      set(c, "synthesize",
          {{"instruction_tokens", 120}, {"question_tokens", 32},
           {"answer_tokens", 64}, {"context_count", 3},
           {"chunk_tokens", 256}, {"refine_instruction_tokens", 140}});
      c.components["synthesize"].synthesis_mode = "refine";
      break;
    case AppKind::kContextualRetrieval:
      set(c, "contextualize",
          {{"chunk_count", 48}, {"chunk_tokens", 256}, {"neighbor_count", 4},
           {"instruction_tokens", 64}, {"context_tokens", 48}});
      set(c, "indexing", {{"chunk_count", 48}, {"chunk_tokens", 304}});
      set(c, "query_embedding", {{"query_count", 1}, {"query_tokens", 32}});
      set(c, "search", {{"query_count", 1}, {"top_k", 32},
                        {"chunk_tokens", 304}});
      set(c, "rerank", {{"candidates", 32}, {"top_k", 3},
                        {"chunk_tokens", 304}});
      set(c, "synthesize",
          {{"instruction_tokens", 96}, {"question_tokens", 32},
           {"answer_tokens", 64}, {"context_count", 3},
           {"chunk_tokens", 304}});
      c.components["synthesize"].synthesis_mode = "oneshot";
      break;
  }
  finalize_config(app, c);
  return c;
}

void finalize_config(AppKind app, QueryConfig& c) {
  switch (app) {
    case AppKind::kSearchEngineGen:
      put(c, "judge", "question_tokens", get(c, "proxy", "answer_tokens"));
      put(c, "synthesize", "context_count", get(c, "web_search", "top_k"));
      put(c, "synthesize", "chunk_tokens",
          get(c, "web_search", "chunk_tokens"));
      break;
    case AppKind::kLlmAgent: {
      std::int64_t plan = get(c, "planner", "expansion_count");
      put(c, "tools", "call_count", plan);
      put(c, "responder", "context_count", plan);
      put(c, "responder", "chunk_tokens", get(c, "tools", "result_tokens"));
      break;
    }
    case AppKind::kNaiveRagQa: {
      std::int64_t chunk = get(c, "indexing", "chunk_tokens");
      put(c, "search", "chunk_tokens", chunk);
      put(c, "search", "query_count", get(c, "query_embedding", "query_count"));
      put(c, "synthesize", "chunk_tokens", chunk);
      put(c, "synthesize", "context_count", get(c, "search", "top_k"));
      break;
    }
    case AppKind::kAdvancedRagQa: {
      std::int64_t chunk = get(c, "indexing", "chunk_tokens");
      std::int64_t m = get(c, "query_expansion", "expansion_count");
      put(c, "query_embedding", "query_count", m);
      put(c, "query_embedding", "query_tokens",
          get(c, "query_expansion", "query_tokens"));
      put(c, "search", "query_count", m);
      put(c, "search", "chunk_tokens", chunk);
      put(c, "rerank", "candidates", m * get(c, "search", "top_k"));
      put(c, "rerank", "chunk_tokens", chunk);
      put(c, "synthesize", "chunk_tokens", chunk);
      put(c, "synthesize", "context_count", get(c, "rerank", "top_k"));
      break;
    }
    case AppKind::kContextualRetrieval: {
      std::int64_t chunk = get(c, "contextualize", "chunk_tokens") +
                           get(c, "contextualize", "context_tokens");
      put(c, "indexing", "chunk_count",
          get(c, "contextualize", "chunk_count"));
      put(c, "indexing", "chunk_tokens", chunk);
      put(c, "search", "chunk_tokens", chunk);
      put(c, "search", "query_count", get(c, "query_embedding", "query_count"));
      put(c, "rerank", "candidates",
          get(c, "search", "query_count") * get(c, "search", "top_k"));
      put(c, "rerank", "chunk_tokens", chunk);
      put(c, "synthesize", "chunk_tokens", chunk);
      put(c, "synthesize", "context_count", get(c, "rerank", "top_k"));
      break;
    }
  }
}

ProfileSet default_profiles() {
  ProfileSet s;
  // Prefill is close to flat up to 256 tokens, then linear; B_eff = 256.
  auto llm = profile("llm", EngineCategory::kLlm,
                     {{32, 30}, {128, 31}, {256, 33}, {512, 66}, {1024, 132},
                      {2048, 264}, {4096, 528}},
                     8192, 12);
  llm.kv_slots = 1 << 17;
  llm.decode_ms_per_token = 6;
  llm.max_decode_batch = 32;
  llm.prefix_cache_discount = 0.9;
  s.add(llm);
  auto small = profile("llm-small", EngineCategory::kLlm,
                       {{128, 12}, {512, 22}, {1024, 35}, {2048, 60},
                        {4096, 115}, {8192, 230}},
                       8192);
  small.kv_slots = 1 << 17;
  small.decode_ms_per_token = 6;
  small.max_decode_batch = 64;
  small.prefix_cache_discount = 0.9;
  s.add(small);
  s.add(profile("embedding", EngineCategory::kEmbedding,
                {{1, 10}, {4, 14}, {8, 20}, {16, 30}, {32, 60}, {64, 120}},
                128));
  s.add(profile("rerank", EngineCategory::kRerank,
                {{1, 10}, {8, 25}, {32, 70}, {64, 130}}, 128));
  s.add(profile("vectordb-search", EngineCategory::kSearch,
                {{1, 5}, {4, 8}, {16, 20}, {64, 70}}, 64));
  s.add(profile("vectordb-ingest", EngineCategory::kIngest,
                {{1, 5}, {16, 30}, {64, 110}}, 256));
  s.add(profile("web-search", EngineCategory::kSearch, {{1, 300}, {8, 320}},
                16, 4));
  s.add(profile("tools", EngineCategory::kTool, {{1, 200}, {8, 220}}, 16, 4));
  return s;
}

}  // namespace primflow
