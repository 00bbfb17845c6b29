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


#include "primflow/optimizer/transform.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "primflow/core/error.h"

namespace primflow {
namespace {

struct Builder {
  const Component& comp;
  const QueryConfig& cfg;
  SubGraph sub;

  std::int64_t param(const std::string& name) const {
    return cfg.param(comp.name, name);
  }
  std::int64_t param_or(const std::string& name, std::int64_t v) const {
    return cfg.param_or(comp.name, name, v);
  }

  bool is_control(const std::string& key) const {
    return cfg.conditions.count(key) > 0;
  }

  std::vector<std::string> data_kwargs() const {
    std::vector<std::string> out;
    for (const auto& k : comp.in_kwargs) {
      if (!k.empty() && !is_control(k)) out.push_back(k);
    }
    return out;
  }

  std::vector<std::string> control_kwargs() const {
    std::vector<std::string> out;
    for (const auto& k : comp.in_kwargs) {
      if (is_control(k)) out.push_back(k);
    }
    return out;
  }

  PrimitiveNode& add(const std::string& suffix, PrimitiveKind kind) {
    PrimitiveNode n;
    n.node_id = comp.name + "/" + suffix;
    n.kind = kind;
    n.meta.engine_id = comp.engine_id;
    n.meta.component = comp.name;
    n.meta.query_id = cfg.query_id;
    n.meta.app_id = cfg.app_id;
    n.meta.batchable = comp.batchable;
    sub.nodes.push_back(std::move(n));
    return sub.nodes.back();
  }

  void edge(const PrimitiveNode& from, const PrimitiveNode& to,
            const std::string& key) {
    sub.edges.push_back({from.node_id, to.node_id, key});
  }

  std::string key(const std::string& local) const {
    return comp.name + "." + local;
  }

  // Token length of a data kwarg used as a prompt segment.
  std::int64_t segment_tokens(const std::vector<std::string>& data,
                              std::size_t i) const {
    if (i == 0) return param("question_tokens");
    return param(data[i] + "_tokens");
  }
};

std::vector<std::string> with_controls(std::vector<std::string> keys,
                                       const Builder& b) {
  for (const auto& c : b.control_kwargs()) keys.push_back(c);
  return keys;
}

void decompose_indexing(Builder& b) {
  const std::int64_t n = b.param("chunk_count");
  const std::int64_t tokens = b.param("chunk_tokens");
  auto& embed = b.add("embed", PrimitiveKind::kEmbedding);
  embed.meta.inputs = with_controls(b.data_kwargs(), b);
  embed.meta.outputs = {b.key("vectors")};
  embed.meta.batch_items = std::max<std::int64_t>(1, n);
  embed.meta.output_items = embed.meta.batch_items;
  embed.meta.payload_tokens = n * tokens;
  auto& ingest = b.add("ingest", PrimitiveKind::kIngestion);
  ingest.meta.engine_id = b.comp.aux_engine_id;
  ingest.meta.inputs = {b.key("vectors")};
  ingest.meta.outputs = b.comp.out_kwargs;
  ingest.meta.batch_items = std::max<std::int64_t>(1, n);
  ingest.meta.output_items = 0;
  ingest.meta.payload_tokens = 1;
  b.edge(b.sub.nodes[0], b.sub.nodes[1], b.key("vectors"));
}

void decompose_query_embedding(Builder& b) {
  const std::int64_t q = b.param_or("query_count", 1);
  auto& e = b.add("embed", PrimitiveKind::kEmbedding);
  e.meta.inputs = with_controls(b.data_kwargs(), b);
  e.meta.outputs = b.comp.out_kwargs;
  e.meta.batch_items = std::max<std::int64_t>(1, q);
  e.meta.output_items = e.meta.batch_items;
  e.meta.payload_tokens = q * b.param_or("query_tokens", 16);
}

void decompose_search(Builder& b) {
  const std::int64_t q = b.param_or("query_count", 1);
  const std::int64_t k = b.param("top_k");
  auto& s = b.add("search", PrimitiveKind::kSearching);
  s.meta.inputs = with_controls(b.data_kwargs(), b);
  s.meta.outputs = b.comp.out_kwargs;
  s.meta.batch_items = std::max<std::int64_t>(1, q);
  s.meta.output_items = s.meta.batch_items * k;
  s.meta.payload_tokens = s.meta.output_items * b.param_or("chunk_tokens", 256);
}

void decompose_rerank(Builder& b) {
  const std::int64_t cand = b.param("candidates");
  const std::int64_t k = b.param("top_k");
  auto& r = b.add("rerank", PrimitiveKind::kReranking);
  r.meta.inputs = with_controls(b.data_kwargs(), b);
  r.meta.outputs = b.comp.out_kwargs;
  r.meta.batch_items = std::max<std::int64_t>(1, cand);
  r.meta.output_items = k;
  r.meta.payload_tokens = k * b.param_or("chunk_tokens", 256);
}

void decompose_tool_call(Builder& b) {
  const std::int64_t calls = b.param("call_count");
  auto& s = b.add("call", PrimitiveKind::kSearching);
  s.meta.inputs = with_controls(b.data_kwargs(), b);
  s.meta.outputs = b.comp.out_kwargs;
  s.meta.batch_items = std::max<std::int64_t>(1, calls);
  s.meta.output_items = s.meta.batch_items;
  s.meta.payload_tokens = calls * b.param_or("result_tokens", 64);
}

// Prefill/decode pair shared by query expansion and proxy/judge.
void decompose_llm_call(Builder& b, std::int64_t segments,
                        std::int64_t decode_tokens) {
  auto data = b.data_kwargs();
  auto& p = b.add("prefill", PrimitiveKind::kPrefilling);
  p.meta.inputs = with_controls(data, b);
  p.meta.outputs = {b.key("kv")};
  p.meta.prompt.push_back({"instruction", b.param("instruction_tokens"), ""});
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.meta.prompt.push_back({data[i], b.segment_tokens(data, i), data[i]});
  }
  auto& d = b.add("decode", PrimitiveKind::kDecoding);
  d.meta.inputs = {b.key("kv")};
  d.meta.outputs = b.comp.out_kwargs;
  d.meta.decode_tokens = decode_tokens;
  d.meta.splittable = b.comp.splittable && segments > 1;
  d.meta.output_segments = std::max<std::int64_t>(1, segments);
  d.meta.output_items = d.meta.output_segments;
  d.meta.payload_tokens = decode_tokens;
  b.edge(b.sub.nodes[0], b.sub.nodes[1], b.key("kv"));
}

void decompose_query_expansion(Builder& b) {
  const std::int64_t m = b.param("expansion_count");
  decompose_llm_call(b, m, m * b.param("query_tokens"));
}

void decompose_proxy_judge(Builder& b) {
  decompose_llm_call(b, 1, b.param("answer_tokens"));
  if (b.comp.condition.empty()) return;
  auto it = b.cfg.conditions.find(b.comp.condition);
  if (it == b.cfg.conditions.end()) {
    throw Error(ErrorCode::kConfigMissing,
                b.comp.name + ": condition " + b.comp.condition);
  }
  auto& c = b.add("condition", PrimitiveKind::kCondition);
  c.meta.engine_id.clear();
  c.meta.batchable = false;
  c.meta.inputs = {b.comp.out_kwargs.front()};
  c.meta.outputs = {b.comp.condition};
  c.meta.condition = b.comp.condition;
  c.meta.condition_value = it->second;
  c.meta.output_items = 0;
  c.meta.payload_tokens = 1;
  b.edge(b.sub.nodes[1], b.sub.nodes[2], b.comp.out_kwargs.front());
}

void decompose_contextualize(Builder& b) {
  const std::int64_t n = std::max<std::int64_t>(1, b.param("chunk_count"));
  const std::int64_t chunk = b.param("chunk_tokens");
  auto data = b.data_kwargs();
  const std::string docs = data.empty() ? "" : data.front();
  auto& p = b.add("prefill", PrimitiveKind::kPrefilling);
  p.meta.inputs = with_controls(data, b);
  p.meta.outputs = {b.key("kv")};
  p.meta.batch_items = n;
  p.meta.output_items = n;
  p.meta.prompt = {
      {"instruction", b.param("instruction_tokens"), ""},
      {"neighbors", b.param_or("neighbor_count", 4) * chunk, docs},
      {"chunk", chunk, docs},
  };
  auto& d = b.add("decode", PrimitiveKind::kDecoding);
  d.meta.inputs = {b.key("kv")};
  d.meta.outputs = b.comp.out_kwargs;
  d.meta.batch_items = n;
  d.meta.output_items = n;
  d.meta.decode_tokens = b.param("context_tokens");
  d.meta.payload_tokens = n * (chunk + d.meta.decode_tokens);
  b.edge(b.sub.nodes[0], b.sub.nodes[1], b.key("kv"));
}

void decompose_synthesize(Builder& b) {
  auto cc = b.cfg.components.find(b.comp.name);
  std::string mode_name =
      cc == b.cfg.components.end() ? "" : cc->second.synthesis_mode;
  auto mode = parse_synthesis_mode(mode_name);
  if (!mode) {
    throw Error(ErrorCode::kInvalidMode,
                b.comp.name + ": synthesis_mode '" + mode_name + "'");
  }
  auto data = b.data_kwargs();
  if (data.empty()) {
    throw Error(ErrorCode::kConfigMissing, b.comp.name + ": question input");
  }
  const std::string question = data[0];
  const std::string context = data.size() > 1 ? data[1] : "";
  const std::int64_t instr = b.param("instruction_tokens");
  const std::int64_t q_tokens = b.param("question_tokens");
  const std::int64_t answer = b.param("answer_tokens");
  std::int64_t k = context.empty() ? 0 : b.param("context_count");
  const std::int64_t chunk = k > 0 ? b.param("chunk_tokens") : 0;
  std::vector<PromptSegment> extras;
  for (std::size_t i = 2; i < data.size(); ++i) {
    extras.push_back({data[i], b.param(data[i] + "_tokens"), data[i]});
  }

  // Adds one prefill/decode call; returns the decode node index.
  auto call = [&](int idx, std::vector<PromptSegment> prompt,
                  std::vector<std::string> out, bool head) {
    std::string tag = std::to_string(idx);
    auto& p = b.add("prefill" + tag, PrimitiveKind::kPrefilling);
    std::vector<std::string> inputs;
    for (const auto& s : prompt) {
      if (!s.key.empty() &&
          std::find(inputs.begin(), inputs.end(), s.key) == inputs.end()) {
        inputs.push_back(s.key);
      }
    }
    if (head) inputs = with_controls(inputs, b);
    p.meta.inputs = inputs;
    p.meta.outputs = {b.key("kv" + tag)};
    p.meta.prompt = std::move(prompt);
    std::size_t pi = b.sub.nodes.size() - 1;
    auto& d = b.add("decode" + tag, PrimitiveKind::kDecoding);
    d.meta.inputs = {b.key("kv" + tag)};
    d.meta.outputs = std::move(out);
    d.meta.decode_tokens = answer;
    d.meta.payload_tokens = answer;
    std::size_t di = b.sub.nodes.size() - 1;
    b.edge(b.sub.nodes[pi], b.sub.nodes[di], b.key("kv" + tag));
    return di;
  };
  auto base = [&]() {
    return std::vector<PromptSegment>{{"instruction", instr, ""},
                                      {"question", q_tokens, question}};
  };

  if (*mode == SynthesisMode::kOneshot || k == 0) {
    auto prompt = base();
    if (k > 0) prompt.push_back({"context", k * chunk, context});
    prompt.insert(prompt.end(), extras.begin(), extras.end());
    call(0, prompt, b.comp.out_kwargs, true);
    return;
  }
  if (*mode == SynthesisMode::kRefine) {
    const std::int64_t refine_instr =
        b.param_or("refine_instruction_tokens", instr);
    std::size_t prev = 0;
    for (int i = 0; i < k; ++i) {
      std::vector<PromptSegment> prompt;
      if (i == 0) {
        prompt = base();
      } else {
        prompt = {{"refine_instruction", refine_instr, ""},
                  {"question", q_tokens, question}};
      }
      prompt.push_back({"context", chunk, context});
      if (i == 0) prompt.insert(prompt.end(), extras.begin(), extras.end());
      std::string prev_key = b.key("answer" + std::to_string(i - 1));
      if (i > 0) prompt.push_back({"candidate_answer", answer, prev_key});
      bool last = i + 1 == k;
      auto out = last ? b.comp.out_kwargs
                      : std::vector<std::string>{b.key("answer" +
                                                       std::to_string(i))};
      std::size_t di = call(i, prompt, out, i == 0);
      if (i > 0) {
        b.sub.edges.push_back({b.sub.nodes[prev].node_id,
                               b.sub.nodes[di - 1].node_id, prev_key});
      }
      prev = di;
    }
    return;
  }
  // Tree: one answer per chunk, merged by a final call.
  std::vector<std::size_t> leaves;
  for (int i = 0; i < k; ++i) {
    auto prompt = base();
    prompt.push_back({"context", chunk, context});
    prompt.insert(prompt.end(), extras.begin(), extras.end());
    leaves.push_back(
        call(i, prompt, {b.key("answer" + std::to_string(i))}, true));
  }
  auto prompt = base();
  for (int i = 0; i < k; ++i) {
    prompt.push_back({"answer" + std::to_string(i), answer,
                      b.key("answer" + std::to_string(i))});
  }
  std::size_t root = call(static_cast<int>(k), prompt, b.comp.out_kwargs, false);
  for (int i = 0; i < k; ++i) {
    b.sub.edges.push_back({b.sub.nodes[leaves[i]].node_id,
                           b.sub.nodes[root - 1].node_id,
                           b.key("answer" + std::to_string(i))});
  }
}

void finish(SubGraph& sub) {
  std::set<std::string> has_parent, has_child;
  for (const auto& e : sub.edges) {
    has_parent.insert(e.to);
    has_child.insert(e.from);
  }
  for (const auto& n : sub.nodes) {
    if (!has_parent.count(n.node_id)) sub.heads.push_back(n.node_id);
    if (!has_child.count(n.node_id)) sub.tails.push_back(n.node_id);
  }
}

// Copy of the template with guarded-off components removed. Their outputs
// are replaced by the guard key in consumers, so consumers still wait for
// the decision, and template edges through them are bridged.
WorkflowTemplate prune_guarded(const WorkflowTemplate& t,
                               const QueryConfig& cfg) {
  WorkflowTemplate out = t;
  for (const auto& c : t.components) {
    if (c.guard.empty()) continue;
    auto it = cfg.conditions.find(c.guard);
    if (it == cfg.conditions.end()) {
      throw Error(ErrorCode::kConfigMissing, c.name + ": condition " + c.guard);
    }
    if (it->second) continue;
    std::erase_if(out.components,
                  [&](const Component& x) { return x.name == c.name; });
    for (auto& other : out.components) {
      for (auto& k : other.in_kwargs) {
        if (std::find(c.out_kwargs.begin(), c.out_kwargs.end(), k) !=
            c.out_kwargs.end()) {
          k = c.guard;
        }
      }
      std::vector<std::string> dedup;
      for (const auto& k : other.in_kwargs) {
        if (std::find(dedup.begin(), dedup.end(), k) == dedup.end()) {
          dedup.push_back(k);
        }
      }
      other.in_kwargs = std::move(dedup);
    }
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::string> preds, succs;
    for (const auto& [a, b] : out.edges) {
      if (b == c.name) preds.push_back(a);
      else if (a == c.name) succs.push_back(b);
      else edges.emplace_back(a, b);
    }
    for (const auto& p : preds) {
      for (const auto& s : succs) {
        if (std::find(edges.begin(), edges.end(), std::pair{p, s}) ==
            edges.end()) {
          edges.emplace_back(p, s);
        }
      }
    }
    out.edges = std::move(edges);
  }
  return out;
}

void apply_prefix_cache(PGraph& g, const ProfileSet& profiles) {
  for (auto& [id, n] : g.nodes) {
    if (!is_prefill_like(n.kind) || !profiles.contains(n.meta.engine_id)) {
      continue;
    }
    std::int64_t leading = 0;
    for (const auto& s : n.meta.prompt) {
      if (!s.key.empty()) break;
      leading += s.tokens;
    }
    double discount = profiles.at(n.meta.engine_id).prefix_cache_discount;
    n.meta.cached_prefix_tokens =
        static_cast<std::int64_t>(std::floor(discount * leading));
  }
}

}  // namespace

SubGraph decompose_component(const Component& comp, const QueryConfig& cfg) {
  Builder b{comp, cfg, {}};
  switch (comp.role) {
    case RoleKind::kIndexing: decompose_indexing(b); break;
    case RoleKind::kQueryEmbedding: decompose_query_embedding(b); break;
    case RoleKind::kSearch: decompose_search(b); break;
    case RoleKind::kRerank: decompose_rerank(b); break;
    case RoleKind::kQueryExpansion: decompose_query_expansion(b); break;
    case RoleKind::kLlmSynthesize: decompose_synthesize(b); break;
    case RoleKind::kProxyJudge: decompose_proxy_judge(b); break;
    case RoleKind::kToolCall: decompose_tool_call(b); break;
    case RoleKind::kContextualize: decompose_contextualize(b); break;
    default:
      throw Error(ErrorCode::kUnknownRoleKind, comp.name);
  }
  finish(b.sub);
  return std::move(b.sub);
}

PGraph transform(const WorkflowTemplate& t, const QueryConfig& config,
                 const TransformOptions& options) {
  validate_config(t, config);
  WorkflowTemplate live = prune_guarded(t, config);

  PGraph g;
  g.query_id = config.query_id;
  g.app_id = config.app_id;
  g.external_inputs.insert(t.inputs.begin(), t.inputs.end());

  std::map<std::string, SubGraph> subs;
  for (const auto& comp : live.components) {
    SubGraph sub = decompose_component(comp, config);
    for (const auto& n : sub.nodes) g.add_node(n);
    for (const auto& e : sub.edges) g.add_edge(e);
    subs.emplace(comp.name, std::move(sub));
  }

  auto link = [&](const std::string& a, const std::string& b) {
    for (const auto& tail : subs.at(a).tails) {
      const auto& outs = g.node(tail).meta.outputs;
      for (const auto& head : subs.at(b).heads) {
        const auto& ins = g.node(head).meta.inputs;
        bool linked = false;
        for (const auto& k : outs) {
          if (std::find(ins.begin(), ins.end(), k) != ins.end()) {
            g.add_edge({tail, head, k});
            linked = true;
          }
        }
        if (!linked) g.add_edge({tail, head, ""});
      }
    }
  };

  if (options.wiring != Wiring::kComponentData) {
    for (const auto& [a, b] : live.edges) link(a, b);
    if (options.wiring == Wiring::kSequential) {
      for (std::size_t i = 1; i < live.components.size(); ++i) {
        link(live.components[i - 1].name, live.components[i].name);
      }
    }
  } else {
    // Module-level parallelism: B waits for A only if A (transitively
    // through the template) feeds one of B's inputs.
    std::map<std::string, std::set<std::string>> produces;
    for (const auto& c : live.components) {
      produces[c.name].insert(c.out_kwargs.begin(), c.out_kwargs.end());
      if (!c.condition.empty()) produces[c.name].insert(c.condition);
    }
    for (const auto& b : live.components) {
      for (const auto& a : live.components) {
        if (a.name == b.name) continue;
        bool feeds = std::any_of(
            b.in_kwargs.begin(), b.in_kwargs.end(),
            [&](const std::string& k) { return produces[a.name].count(k); });
        if (feeds) link(a.name, b.name);
      }
    }
  }
  if (options.prefix_cache) apply_prefix_cache(g, *options.prefix_cache);
  topo_sort(g);
  return g;
}

}  // namespace primflow
