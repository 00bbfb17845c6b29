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


#include "primflow/optimizer/passes.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "primflow/core/error.h"

namespace primflow {
namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string stage_key(const std::string& key, std::size_t i) {
  return key + "#" + std::to_string(i);
}

// Splits `total` proportionally to `weights` (largest remainder; ties go
// to the earlier part). Parts sum exactly to `total`.
std::vector<std::int64_t> apportion(std::int64_t total,
                                    const std::vector<std::int64_t>& weights) {
  std::vector<std::int64_t> out(weights.size(), 0);
  std::int64_t wsum = std::accumulate(weights.begin(), weights.end(),
                                      std::int64_t{0});
  if (wsum <= 0 || total <= 0) return out;
  std::vector<std::pair<std::int64_t, std::size_t>> rem;
  std::int64_t used = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = total * weights[i] / wsum;
    used += out[i];
    rem.push_back({total * weights[i] % wsum, i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (std::size_t j = 0; used < total; ++j, ++used) ++out[rem[j].second];
  return out;
}

std::vector<std::int64_t> chunk_sizes(std::int64_t n, std::int64_t size) {
  std::vector<std::int64_t> out;
  for (std::int64_t left = n; left > 0; left -= size) {
    out.push_back(std::min(left, size));
  }
  return out;
}

struct Upstream {
  std::vector<std::string> stages;
  std::vector<std::string> keys;  // keys carried stage-wise
};

std::vector<std::int64_t> output_partition(const PrimitiveNode& n,
                                           const std::vector<std::int64_t>& sizes) {
  if (n.meta.output_items == n.meta.batch_items) return sizes;
  return apportion(n.meta.output_items, sizes);
}

std::vector<std::string> create_stages(PGraph& g, const PrimitiveNode& orig,
                                       const std::vector<std::int64_t>& sizes,
                                       const std::vector<Edge>& in_edges,
                                       const Upstream* up) {
  auto out_part = output_partition(orig, sizes);
  auto pay_part = apportion(orig.meta.payload_tokens, sizes);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    PrimitiveNode s = orig;
    s.node_id = stage_key(orig.node_id, i);
    s.meta.batch_items = std::max<std::int64_t>(1, sizes[i]);
    s.meta.output_items = out_part[i];
    s.meta.payload_tokens = pay_part[i];
    for (auto& k : s.meta.outputs) k = stage_key(k, i);
    if (up) {
      for (auto& k : s.meta.inputs) {
        if (contains(up->keys, k)) k = stage_key(k, i);
      }
    }
    s.meta.stage_of = orig.node_id;
    s.meta.stage_index = static_cast<int>(i);
    ids.push_back(s.node_id);
    g.add_node(std::move(s));
    for (const auto& e : in_edges) g.add_edge({e.from, ids.back(), e.key});
    if (up) {
      for (const auto& k : up->keys) {
        g.add_edge({up->stages[i], ids.back(), k.empty() ? "" : stage_key(k, i)});
      }
    }
  }
  return ids;
}

bool propagatable(const PGraph& g, const PrimitiveNode& c,
                  const PrimitiveNode& producer,
                  const std::vector<std::string>& keys) {
  if (keys.empty() || !c.meta.batchable || is_control_flow(c.kind)) return false;
  if (!c.meta.stage_of.empty()) return false;
  if (c.meta.batch_items != producer.meta.output_items) return false;
  for (const auto& p : g.parents(c.node_id)) {
    if (!g.node(p).meta.stage_of.empty()) return false;
  }
  // An input whose producer is itself mid-rewrite has no node yet; splitting
  // now would drop that dependency.
  for (const auto& k : c.meta.inputs) {
    if (contains(keys, k) || g.external_inputs.count(k)) continue;
    bool produced = false;
    for (const auto& [id, n] : g.nodes) {
      if (contains(n.meta.outputs, k)) {
        produced = true;
        break;
      }
    }
    if (!produced) return false;
  }
  return true;
}

// Rewires the consumers of a node that was replaced by `stages`. Aligned
// batchable consumers are split stage-wise (pipelining, one level deep per
// consumer); every other consumer gets its own Aggregate.
void add_aggregate(PGraph& g, const PrimitiveNode& orig,
                   const std::vector<std::string>& stages,
                   const std::vector<std::string>& keys,
                   const std::string& cid) {
  PrimitiveNode agg;
  agg.node_id = orig.node_id + "/agg@" + cid;
  agg.kind = PrimitiveKind::kAggregate;
  agg.meta.component = orig.meta.component;
  agg.meta.query_id = orig.meta.query_id;
  agg.meta.app_id = orig.meta.app_id;
  agg.meta.batch_items = std::max<std::int64_t>(1, orig.meta.output_items);
  agg.meta.output_items = orig.meta.output_items;
  agg.meta.payload_tokens = orig.meta.payload_tokens;
  for (const auto& k : keys) {
    for (std::size_t i = 0; i < stages.size(); ++i) {
      agg.meta.inputs.push_back(stage_key(k, i));
    }
    agg.meta.outputs.push_back(k);
  }
  g.add_node(agg);
  for (const auto& k : keys) {
    for (std::size_t i = 0; i < stages.size(); ++i) {
      g.add_edge({stages[i], agg.node_id, stage_key(k, i)});
    }
    g.add_edge({agg.node_id, cid, k});
  }
}

void route_consumers(PGraph& g, const PrimitiveNode& orig,
                     const std::vector<Edge>& out_edges,
                     const std::vector<std::string>& stages,
                     const std::vector<std::int64_t>& out_part) {
  std::map<std::string, std::vector<Edge>> by_consumer;
  for (const auto& e : out_edges) by_consumer[e.to].push_back(e);
  for (const auto& [cid, edges] : by_consumer) {
    std::vector<std::string> keys;
    for (const auto& e : edges) {
      if (!e.key.empty() && !contains(keys, e.key)) keys.push_back(e.key);
    }
    const PrimitiveNode consumer = g.node(cid);
    if (propagatable(g, consumer, orig, keys)) {
      auto c_in = g.in_edges(cid);
      auto c_out = g.out_edges(cid);
      g.remove_node(cid);
      Upstream up{stages, keys};
      std::vector<std::int64_t> sizes = out_part;
      auto c_stages = create_stages(g, consumer, sizes, c_in, &up);
      route_consumers(g, consumer, c_out, c_stages,
                      output_partition(consumer, sizes));
      continue;
    }
    if (keys.empty()) {
      for (const auto& s : stages) g.add_edge({s, cid, ""});
      continue;
    }
    add_aggregate(g, orig, stages, keys, cid);
  }
  // Readers that reach the producer only through other nodes (ordering
  // edges of an unpruned graph) still need the whole output.
  std::set<std::pair<std::string, std::string>> direct;
  for (const auto& e : out_edges) direct.insert({e.to, e.key});
  std::vector<std::pair<std::string, std::vector<std::string>>> indirect;
  for (const auto& [rid, r] : g.nodes) {
    if (contains(stages, rid)) continue;
    std::vector<std::string> keys;
    for (const auto& k : r.meta.inputs) {
      if (contains(orig.meta.outputs, k) && !direct.count({rid, k}) &&
          !contains(keys, k)) {
        keys.push_back(k);
      }
    }
    if (!keys.empty()) indirect.emplace_back(rid, std::move(keys));
  }
  for (const auto& [rid, keys] : indirect) {
    add_aggregate(g, orig, stages, keys, rid);
  }
}

template <typename Fn>
PGraph fixpoint(const PGraph& g, std::string_view name, Fn&& once) {
  PGraph cur = g;
  for (int round = 0;; ++round) {
    if (!once(cur)) break;
    if (round + 1 >= kMaxFixpointRounds) {
      PGraph probe = cur;
      if (once(probe)) {
        throw Error(ErrorCode::kInternal,
                    std::string(name) + " did not reach a fixpoint");
      }
      break;
    }
  }
  return cur;
}

}  // namespace

std::string_view pass_name(PassId pass) {
  switch (pass) {
    case PassId::kDependencyPruning: return "prune";
    case PassId::kStageDecomposition: return "stage";
    case PassId::kPrefillSplit: return "prefill-split";
    case PassId::kDecodePipelining: return "decode-pipeline";
  }
  return "?";
}

std::optional<PassId> parse_pass(std::string_view name) {
  for (PassId p : kPassOrder) {
    if (pass_name(p) == name) return p;
  }
  return std::nullopt;
}

PassSet all_passes() { return PassSet(std::begin(kPassOrder), std::end(kPassOrder)); }

PassSet parse_pass_list(std::string_view list) {
  PassSet out;
  if (list == "all") return all_passes();
  if (list.empty() || list == "none") return out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    auto item = list.substr(start, end - start);
    auto p = parse_pass(item);
    if (!p) {
      throw Error(ErrorCode::kConfigParse, "unknown pass '" +
                                               std::string(item) + "'");
    }
    out.insert(*p);
    start = end + 1;
  }
  return out;
}

bool prune_dependencies_once(PGraph& g) {
  std::vector<Edge> next;
  for (const auto& e : g.edges()) {
    if (!e.key.empty()) next.push_back(e);
  }
  for (const auto& [vid, v] : g.nodes) {
    for (const auto& key : v.meta.inputs) {
      // Breadth-first over ancestors; the nearest producers win.
      std::vector<std::string> frontier = g.parents(vid);
      std::set<std::string> seen(frontier.begin(), frontier.end());
      while (!frontier.empty()) {
        std::vector<std::string> producers;
        for (const auto& u : frontier) {
          if (contains(g.node(u).meta.outputs, key)) producers.push_back(u);
        }
        if (!producers.empty()) {
          for (const auto& u : producers) next.push_back({u, vid, key});
          break;
        }
        std::vector<std::string> up;
        for (const auto& u : frontier) {
          for (const auto& p : g.parents(u)) {
            if (seen.insert(p).second) up.push_back(p);
          }
        }
        std::sort(up.begin(), up.end());
        frontier = std::move(up);
      }
    }
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  if (next == g.edges()) return false;
  g.set_edges(std::move(next));
  return true;
}

std::int64_t stage_size(const PrimitiveNode& n, const ProfileSet& profiles) {
  if (!profiles.contains(n.meta.engine_id)) return n.meta.batch_items;
  const auto& p = profiles.at(n.meta.engine_id);
  if (p.is_llm()) {
    if (is_decode_like(n.kind)) return p.max_decode_batch;
    return std::max<std::int64_t>(1, max_efficient_batch(p) /
                                         n.load_per_request());
  }
  return max_efficient_batch(p);
}

bool stage_decompose_once(PGraph& g, const ProfileSet& profiles) {
  bool changed = false;
  for (const auto& id : topo_sort(g)) {
    if (!g.has_node(id)) continue;
    const PrimitiveNode n = g.node(id);
    if (!n.meta.batchable || !n.meta.stage_of.empty() ||
        is_control_flow(n.kind) || n.kind == PrimitiveKind::kPartialDecoding) {
      continue;
    }
    std::int64_t size = stage_size(n, profiles);
    if (n.meta.batch_items <= size) continue;
    auto sizes = chunk_sizes(n.meta.batch_items, size);
    auto in = g.in_edges(id);
    auto out = g.out_edges(id);
    g.remove_node(id);
    auto stages = create_stages(g, n, sizes, in, nullptr);
    route_consumers(g, n, out, stages, output_partition(n, sizes));
    changed = true;
  }
  return changed;
}

bool split_prefill_once(PGraph& g, const ProfileSet* profiles) {
  bool changed = false;
  for (const auto& id : topo_sort(g)) {
    if (!g.has_node(id)) continue;
    const PrimitiveNode n = g.node(id);
    if (n.kind != PrimitiveKind::kPrefilling || g.parents(id).empty()) continue;
    std::size_t cut = 0;
    while (cut < n.meta.prompt.size()) {
      const auto& key = n.meta.prompt[cut].key;
      if (!key.empty() && !g.external_inputs.count(key)) break;
      ++cut;
    }
    if (cut == 0 || cut == n.meta.prompt.size()) continue;
    std::vector<PromptSegment> prefix(n.meta.prompt.begin(),
                                      n.meta.prompt.begin() + cut);
    std::vector<PromptSegment> suffix(n.meta.prompt.begin() + cut,
                                      n.meta.prompt.end());
    std::int64_t prefix_tokens = 0, suffix_tokens = 0;
    for (const auto& s : prefix) prefix_tokens += s.tokens;
    for (const auto& s : suffix) suffix_tokens += s.tokens;
    if (prefix_tokens == 0) continue;
    if (profiles && profiles->contains(n.meta.engine_id)) {
      // Only split when resuming from the prefix beats recomputing it.
      const auto& p = profiles->at(n.meta.engine_id);
      double eps = split_overhead(p, prefix_tokens);
      double split = eps * latency(p, static_cast<double>(suffix_tokens));
      double whole =
          latency(p, static_cast<double>(prefix_tokens + suffix_tokens));
      if (!(split < whole)) continue;
    }

    PrimitiveNode partial = n;
    partial.node_id = id + "/partial";
    partial.kind = PrimitiveKind::kPartialPrefilling;
    partial.meta.prompt = prefix;
    partial.meta.inputs.clear();
    for (const auto& s : prefix) {
      if (!s.key.empty() && !contains(partial.meta.inputs, s.key)) {
        partial.meta.inputs.push_back(s.key);
      }
    }
    const std::string prefix_key = id + ".prefix";
    partial.meta.outputs = {prefix_key};
    partial.meta.payload_tokens = 0;
    partial.meta.cached_prefix_tokens = 0;

    PrimitiveNode full = n;
    full.node_id = id + "/full";
    full.kind = PrimitiveKind::kFullPrefilling;
    full.meta.prompt = suffix;
    full.meta.prefix_tokens = prefix_tokens;
    full.meta.cached_prefix_tokens = 0;
    full.meta.inputs.clear();
    for (const auto& k : n.meta.inputs) {
      if (!contains(partial.meta.inputs, k)) full.meta.inputs.push_back(k);
    }
    full.meta.inputs.push_back(prefix_key);

    auto in = g.in_edges(id);
    auto out = g.out_edges(id);
    g.remove_node(id);
    g.add_node(partial);
    g.add_node(full);
    g.add_edge({partial.node_id, full.node_id, prefix_key});
    for (const auto& e : in) g.add_edge({e.from, full.node_id, e.key});
    for (const auto& e : out) g.add_edge({full.node_id, e.to, e.key});
    changed = true;
  }
  return changed;
}

bool pipeline_decode_once(PGraph& g) {
  bool changed = false;
  for (const auto& id : topo_sort(g)) {
    if (!g.has_node(id)) continue;
    const PrimitiveNode n = g.node(id);
    const std::int64_t m = n.meta.output_segments;
    if (n.kind != PrimitiveKind::kDecoding || !n.meta.splittable || m <= 1 ||
        !n.meta.stage_of.empty()) {
      continue;
    }
    auto out = g.out_edges(id);
    bool has_batchable_consumer = false;
    for (const auto& e : out) {
      const auto& c = g.node(e.to);
      if (!e.key.empty() && c.meta.batchable && !is_control_flow(c.kind) &&
          c.meta.stage_of.empty() &&
          c.meta.batch_items == n.meta.output_items) {
        has_batchable_consumer = true;
      }
    }
    if (!has_batchable_consumer) continue;

    std::vector<std::int64_t> ones(static_cast<std::size_t>(m), 1);
    auto tokens = apportion(n.meta.decode_tokens, ones);
    auto out_part = apportion(n.meta.output_items, ones);
    auto pay_part = apportion(n.meta.payload_tokens, ones);
    auto in = g.in_edges(id);
    g.remove_node(id);
    std::vector<std::string> pds;
    for (std::size_t i = 0; i < ones.size(); ++i) {
      PrimitiveNode pd = n;
      pd.node_id = stage_key(id, i);
      pd.kind = PrimitiveKind::kPartialDecoding;
      pd.meta.decode_tokens = tokens[i];
      pd.meta.output_items = out_part[i];
      pd.meta.payload_tokens = pay_part[i];
      pd.meta.output_segments = 1;
      pd.meta.stage_of = id;
      pd.meta.stage_index = static_cast<int>(i);
      pd.meta.outputs.clear();
      for (const auto& k : n.meta.outputs) {
        pd.meta.outputs.push_back(stage_key(k, i));
      }
      if (i + 1 < ones.size()) {
        pd.meta.outputs.push_back(stage_key(id + ".cont", i));
      }
      if (i > 0) pd.meta.inputs = {stage_key(id + ".cont", i - 1)};
      pds.push_back(pd.node_id);
      g.add_node(std::move(pd));
      if (i == 0) {
        for (const auto& e : in) g.add_edge({e.from, pds[0], e.key});
      } else {
        g.add_edge({pds[i - 1], pds[i], stage_key(id + ".cont", i - 1)});
      }
    }
    route_consumers(g, n, out, pds, out_part);
    changed = true;
  }
  return changed;
}

PGraph prune_dependencies(const PGraph& g) {
  return fixpoint(g, "prune", [](PGraph& x) { return prune_dependencies_once(x); });
}

PGraph stage_decompose(const PGraph& g, const ProfileSet& profiles) {
  return fixpoint(g, "stage", [&](PGraph& x) {
    return stage_decompose_once(x, profiles);
  });
}

PGraph split_prefill(const PGraph& g, const ProfileSet* profiles) {
  return fixpoint(g, "prefill-split", [&](PGraph& x) {
    return split_prefill_once(x, profiles);
  });
}

PGraph pipeline_decode(const PGraph& g) {
  return fixpoint(g, "decode-pipeline",
                  [](PGraph& x) { return pipeline_decode_once(x); });
}

PGraph run_pass(PassId pass, const PGraph& g, const ProfileSet& profiles) {
  switch (pass) {
    case PassId::kDependencyPruning: return prune_dependencies(g);
    case PassId::kStageDecomposition: return stage_decompose(g, profiles);
    case PassId::kPrefillSplit: return split_prefill(g, &profiles);
    case PassId::kDecodePipelining: return pipeline_decode(g);
  }
  return g;
}

std::vector<std::string> semantic_violations(const PGraph& g) {
  std::vector<std::string> out;
  for (const auto& [id, n] : g.nodes) {
    std::set<std::string> anc;
    bool computed = false;
    for (const auto& k : n.meta.inputs) {
      if (g.external_inputs.count(k)) continue;
      if (!computed) {
        anc = ancestors(g, id);
        computed = true;
      }
      bool covered = std::any_of(anc.begin(), anc.end(), [&](const auto& a) {
        return contains(g.node(a).meta.outputs, k);
      });
      if (!covered) out.push_back(id + " <- " + k);
    }
  }
  return out;
}

}  // namespace primflow
