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


#include <gtest/gtest.h>

#include <algorithm>

#include "primflow/core/error.h"
#include "primflow/core/serialize.h"
#include "primflow/optimizer/optimizer.h"
#include "primflow/report/experiment.h"
#include "primflow/runtime/batching.h"
#include "primflow/runtime/query_context.h"
#include "primflow/runtime/simulator.h"
#include "primflow/workloads/apps.h"
#include "scenarios.h"

namespace primflow {
namespace {

using testing::make_node;

EGraph with_depths(PGraph g, const std::string& query = "q") {
  g.query_id = query;
  for (auto& [id, n] : g.nodes) n.meta.query_id = query;
  EGraph e;
  e.depth = assign_depths(g);
  e.graph = std::move(g);
  return e;
}

EGraph chain_ab() {
  PGraph g;
  g.external_inputs = {"x"};
  g.add_node(make_node("a", PrimitiveKind::kEmbedding, "embedding", {"x"}, {"ka"}));
  g.add_node(make_node("b", PrimitiveKind::kEmbedding, "embedding", {"ka"}, {"kb"}));
  g.add_edge({"a", "b", "ka"});
  return with_depths(g);
}

EGraph diamond() {
  PGraph g;
  g.external_inputs = {"x"};
  g.add_node(make_node("a", PrimitiveKind::kEmbedding, "embedding", {"x"}, {"ka"}));
  g.add_node(make_node("b", PrimitiveKind::kEmbedding, "embedding", {"ka"}, {"kb"}));
  g.add_node(make_node("c", PrimitiveKind::kEmbedding, "embedding", {"ka"}, {"kc"}));
  g.add_node(make_node("d", PrimitiveKind::kEmbedding, "embedding", {"kb", "kc"},
                       {"kd"}));
  g.add_edge({"a", "b", "ka"});
  g.add_edge({"a", "c", "ka"});
  g.add_edge({"b", "d", "kb"});
  g.add_edge({"c", "d", "kc"});
  return with_depths(g);
}

EGraph app_egraph(AppKind app, const std::string& query,
                  const ProfileSet& prof, const QueryConfig* cfg = nullptr) {
  QueryConfig c = cfg ? *cfg : default_app_config(app, query);
  c.query_id = query;
  return optimize(transform(build_app_template(app), c), prof, all_passes());
}

std::vector<std::string> enqueued_at(const Trace& t, SimTime at) {
  std::vector<std::string> out;
  for (const auto& r : t.records) {
    if (r.event == TraceEvent::kEnqueue && r.at == at) out.push_back(r.node_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void expect_safety(const Trace& t, const std::map<std::string, EGraph>& gs) {
  for (const auto& q : t.queries) {
    const PGraph& g = gs.at(q.query_id).graph;
    ASSERT_EQ(q.nodes.size(), g.nodes.size());
    for (const auto& [id, tm] : q.nodes) {
      EXPECT_LE(tm.start, tm.complete);
      for (const auto& p : g.parents(id)) {
        EXPECT_GE(tm.start, q.nodes.at(p).complete) << q.query_id << " " << id;
      }
    }
  }
}

void expect_slot_discipline(const Trace& t) {
  for (const auto& b : t.batches) {
    EXPECT_GT(b.requests, 0);
    EXPECT_LE(b.load, b.capacity) << b.engine << " batch " << b.id;
  }
}

void expect_non_preemption(const Trace& t) {
  std::map<std::pair<std::string, int>, std::vector<std::pair<SimTime, SimTime>>>
      spans;
  for (const auto& b : t.batches) spans[{b.engine, b.instance}].push_back({b.start, b.end});
  for (auto& [k, v] : spans) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) {
      EXPECT_LE(v[i - 1].second, v[i].first) << k.first << "/" << k.second;
    }
  }
}

TEST(QueryContext, ChainCompletionReadiesChild) {
  QueryContext ctx(chain_ab(), 0);
  EXPECT_EQ(ctx.ready_nodes(), std::vector<std::string>{"a"});
  ctx.mark_dispatched("a");
  EXPECT_EQ(ctx.on_primitive_complete("a", 5), std::vector<std::string>{"b"});
  EXPECT_EQ(ctx.object_store().count("ka"), 1u);
  ctx.mark_dispatched("b");
  ctx.on_primitive_complete("b", 9);
  EXPECT_TRUE(ctx.done());
  EXPECT_EQ(ctx.finish_time(), 9);
}

TEST(QueryContext, JoinWaitsForBothParents) {
  QueryContext ctx(diamond(), 0);
  ctx.mark_dispatched("a");
  auto ready = ctx.on_primitive_complete("a", 1);
  EXPECT_EQ(ready, (std::vector<std::string>{"b", "c"}));
  ctx.mark_dispatched("b");
  EXPECT_TRUE(ctx.on_primitive_complete("b", 2).empty());
  EXPECT_EQ(ctx.in_degree("d"), 1);
  ctx.mark_dispatched("c");
  EXPECT_EQ(ctx.on_primitive_complete("c", 3), std::vector<std::string>{"d"});
}

TEST(QueryContext, Errors) {
  QueryContext ctx(chain_ab(), 0);
  try {
    ctx.on_primitive_complete("zz", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownNode);
  }
  EXPECT_THROW(ctx.mark_dispatched("b"), Error);
  ctx.mark_dispatched("a");
  EXPECT_THROW(ctx.mark_dispatched("a"), Error);
  ctx.on_primitive_complete("a", 1);
  EXPECT_THROW(ctx.on_primitive_complete("a", 2), Error);
}

TEST(Submit, SingleNodeEnqueuedImmediately) {
  PGraph g;
  g.external_inputs = {"x"};
  g.add_node(make_node("a", PrimitiveKind::kEmbedding, "embedding", {"x"}, {"y"}));
  ProfileSet prof = default_profiles();
  Simulator sim(prof, SimOptions{});
  sim.submit({with_depths(g), 250, 0});
  Trace t = sim.run();
  EXPECT_EQ(enqueued_at(t, 250), std::vector<std::string>{"a"});
  EXPECT_EQ(t.queries.at(0).nodes.at("a").start, 250);
}

TEST(Submit, BothBranchHeadsEnqueuedTogether) {
  auto tmpl = parse_template(read_file(testing::config_path("templates/single_query_rag.json")));
  auto cfg = parse_config(
      read_file(testing::config_path("templates/single_query_rag.query.json")));
  ProfileSet prof = load_profiles(testing::config_path("profiles/single_query_rag.json"));
  EGraph e = optimize(transform(tmpl, cfg), prof, all_passes());
  Trace t = simulate_one(e, prof, SimOptions{});
  auto heads = enqueued_at(t, 0);
  auto has_comp = [&](const std::string& comp) {
    return std::any_of(heads.begin(), heads.end(), [&](const std::string& id) {
      return e.graph.node(id).meta.component == comp;
    });
  };
  EXPECT_TRUE(has_comp("indexing"));
  EXPECT_TRUE(has_comp("query_expansion"));
}

TEST(Submit, PrunedBranchNeverEnqueued) {
  ProfileSet prof = default_profiles();
  auto app = AppKind::kSearchEngineGen;
  auto off = default_app_config(app, "q");
  off.conditions["needs_search"] = false;
  EGraph e = app_egraph(app, "q", prof, &off);
  for (const auto& [id, n] : e.graph.nodes) {
    EXPECT_NE(n.meta.component, "web_search");
  }
  Trace t = simulate_one(e, prof, SimOptions{});
  ASSERT_EQ(t.queries.size(), 1u);
  for (const auto& r : t.records) EXPECT_EQ(r.node_id.find("web_search"), std::string::npos);
  EXPECT_EQ(t.queries[0].nodes.size(), e.graph.nodes.size());
}

TEST(Submit, DuplicateQueryIdRejected) {
  ProfileSet prof = default_profiles();
  Simulator sim(prof, SimOptions{});
  sim.submit({chain_ab(), 0, 0});
  try {
    sim.submit({chain_ab(), 5, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateQueryId);
  }
}

TEST(OnComplete, FirstPartialDecodeReleasesItsEmbedding) {
  ProfileSet prof = default_profiles();
  EGraph e = app_egraph(AppKind::kAdvancedRagQa, "q", prof);
  Trace t = simulate_one(e, prof, SimOptions{});
  const auto& n = t.queries.at(0).nodes;
  EXPECT_LT(n.at("query_embedding/embed#0").start,
            n.at("query_expansion/decode#1").complete);
  EXPECT_LT(n.at("query_expansion/decode#0").complete,
            n.at("query_expansion/decode#1").complete);
}

TEST(FormBatchTopo, PicksDeepNodeOfEachQuery) {
  auto s = testing::two_query_scenario();
  auto q = testing::two_query_queue(s);
  SlotBudget b{1024, 1024, 64, 0};
  BatchPlan plan = form_batch_topo(q, b);
  std::set<std::string> picked;
  for (const auto& p : plan.picks) picked.insert(q[p.entry].node_id);
  EXPECT_EQ(picked, (std::set<std::string>{"A", "H"}));
  EXPECT_EQ(plan.load, 1024);
}

TEST(FormBatchTopo, EmptyQueue) {
  EXPECT_TRUE(form_batch_topo({}, SlotBudget{16, 16, 16, 0}).empty());
}

TEST(FormBatchTopo, OneQueryTakesBothDepths) {
  std::vector<QueueEntry> q(2);
  q[0] = {"q", "shallow", PrimitiveKind::kEmbedding, 0, 1, 3, 1, 0, {}, 0};
  q[1] = {"q", "deep", PrimitiveKind::kEmbedding, 0, 3, 4, 1, 0, {}, 1};
  BatchPlan plan = form_batch_topo(q, SlotBudget{16, 16, 16, 0});
  ASSERT_EQ(plan.picks.size(), 2u);
  EXPECT_EQ(q[plan.picks[0].entry].node_id, "deep");
  EXPECT_EQ(plan.picks[0].count, 4);
  EXPECT_EQ(q[plan.picks[1].entry].node_id, "shallow");
  EXPECT_EQ(plan.requests, 7);
}

TEST(FormBatchTopo, PartialRequestsSpanBatches) {
  std::vector<QueueEntry> q(1);
  q[0] = {"q", "big", PrimitiveKind::kEmbedding, 0, 0, 40, 1, 0, {}, 0};
  BatchPlan plan = form_batch_topo(q, SlotBudget{16, 64, 16, 0});
  ASSERT_EQ(plan.picks.size(), 1u);
  EXPECT_EQ(plan.picks[0].count, 16);
}

TEST(FormBatchBlind, FifoPairsFirstQuery) {
  auto s = testing::two_query_scenario();
  auto q = testing::two_query_queue(s);
  BlindParams p;
  p.budget = SlotBudget{1024, 1024, 64, 0};
  BatchPlan plan = form_batch_blind(q, p, 0);
  std::set<std::string> picked;
  for (const auto& pk : plan.picks) picked.insert(q[pk.entry].node_id);
  EXPECT_EQ(picked, (std::set<std::string>{"A", "B"}));
}

TEST(FormBatchBlind, TimeoutFlushesPartialBatch) {
  std::vector<QueueEntry> q(3);
  for (int i = 0; i < 3; ++i) {
    q[i] = {"q" + std::to_string(i), "n", PrimitiveKind::kEmbedding, 0, 0, 1, 1,
            0, {}, static_cast<std::uint64_t>(i)};
  }
  BlindParams p;
  p.budget = SlotBudget{4, 4, 4, 4};
  p.timeout = 10 * kMicrosPerMilli;
  std::optional<SimTime> wake;
  EXPECT_TRUE(form_batch_blind(q, p, 5 * kMicrosPerMilli, &wake).empty());
  ASSERT_TRUE(wake.has_value());
  EXPECT_EQ(*wake, 10 * kMicrosPerMilli);
  BatchPlan plan = form_batch_blind(q, p, 10 * kMicrosPerMilli);
  EXPECT_EQ(plan.requests, 3);
}

TEST(FormBatchBlind, PerInvocationTakesOneBundle) {
  std::vector<QueueEntry> q(2);
  q[0] = {"q1", "emb", PrimitiveKind::kEmbedding, 0, 0, 3, 1, 0, {}, 0};
  q[1] = {"q2", "emb", PrimitiveKind::kEmbedding, 0, 0, 3, 1, 0, {}, 1};
  BlindParams p;
  p.budget = SlotBudget{16, 16, 16, 0};
  p.per_invocation = true;
  BatchPlan plan = form_batch_blind(q, p, 0);
  ASSERT_EQ(plan.picks.size(), 1u);
  EXPECT_EQ(plan.picks[0].entry, 0u);
  EXPECT_EQ(plan.requests, 3);
}

TEST(Preschedule, Rules) {
  PGraph g;
  auto p = make_node("p", PrimitiveKind::kPrefilling, "llm", {}, {"kv"}, 100);
  auto d = make_node("d", PrimitiveKind::kDecoding, "llm", {"kv"}, {"a"});
  auto e = make_node("e", PrimitiveKind::kEmbedding, "embedding", {}, {"v"});
  e.meta.batch_items = 48;
  e.meta.payload_tokens = 48 * 256;
  auto i = make_node("i", PrimitiveKind::kIngestion, "vectordb-ingest", {"v"}, {"ix"});
  auto s = make_node("s", PrimitiveKind::kSearching, "vectordb-search", {}, {"c"});
  s.meta.payload_tokens = 30;
  auto r = make_node("r", PrimitiveKind::kReranking, "rerank", {"c"}, {"t"});
  for (auto n : {p, d, e, i, s, r}) g.add_node(n);
  CommModel comm;
  auto pd = preschedule(g, {"p", "d", "kv"}, comm);
  EXPECT_TRUE(pd.same_engine);
  EXPECT_TRUE(pd.eligible());
  auto ei = preschedule(g, {"e", "i", "v"}, comm);
  EXPECT_FALSE(ei.same_engine);
  EXPECT_TRUE(ei.large_payload);
  EXPECT_FALSE(preschedule(g, {"s", "r", "c"}, comm).eligible());
  // Direct delivery pays one hop, relay pays two.
  EXPECT_EQ(edge_delay(g, "p", "d", comm), ms_to_sim(comm.hop_ms));
  EXPECT_EQ(edge_delay(g, "s", "r", comm),
            ms_to_sim(2 * comm.hop_ms + 30 * comm.per_token_ms));
}

TEST(Run, NoQueriesEmptyTrace) {
  ProfileSet prof = default_profiles();
  Simulator sim(prof, SimOptions{});
  Trace t = sim.run();
  EXPECT_TRUE(t.records.empty());
  EXPECT_TRUE(t.queries.empty());
  EXPECT_EQ(t.makespan, 0);
}

TEST(Run, SecondQueryQueuesBehindFirstOnOneInstance) {
  ProfileSet prof = load_profiles(testing::config_path("profiles/two_query_batching.json"));
  SimOptions opts;
  opts.comm = testing::zero_comm();
  Simulator sim(prof, opts);
  for (const char* q : {"q1", "q2"}) {
    PGraph g;
    g.external_inputs = {"x"};
    g.add_node(make_node("p", PrimitiveKind::kPrefilling, "llm", {"x"}, {"kv"}, 1024));
    sim.submit({with_depths(g, q), 0, 0});
  }
  Trace t = sim.run();
  const auto& a = t.find("q1")->nodes.at("p");
  const auto& b = t.find("q2")->nodes.at("p");
  EXPECT_EQ(a.start, 0);
  EXPECT_EQ(a.complete, ms_to_sim(800));
  EXPECT_EQ(b.start, a.complete);
  EXPECT_EQ(b.complete, ms_to_sim(1600));
}

TEST(Run, TraceInvariantsAcrossApps) {
  ProfileSet prof = default_profiles();
  for (auto sched : {SchedulerKind::kTopo, SchedulerKind::kBlindPo,
                     SchedulerKind::kBlindTo}) {
    SimOptions opts;
    opts.scheduler = sched;
    Simulator sim(prof, opts);
    std::map<std::string, EGraph> graphs;
    int i = 0;
    for (auto app : kAllApps) {
      for (int k = 0; k < 2; ++k) {
        std::string q = "q" + std::to_string(i++);
        graphs[q] = app_egraph(app, q, prof);
        sim.submit({graphs[q], static_cast<SimTime>(k) * 30 * kMicrosPerMilli, 0});
      }
    }
    Trace t = sim.run();
    ASSERT_EQ(t.queries.size(), graphs.size());
    expect_safety(t, graphs);
    expect_slot_discipline(t);
    expect_non_preemption(t);
  }
}

TEST(Run, DeterministicTraces) {
  ProfileSet prof = default_profiles();
  auto once = [&]() {
    Simulator sim(prof, SimOptions{});
    for (int i = 0; i < 4; ++i) {
      std::string q = "q" + std::to_string(i);
      sim.submit({app_egraph(AppKind::kAdvancedRagQa, q, prof), i * 100, 0});
    }
    return sim.run();
  };
  EXPECT_EQ(once(), once());
}

TEST(Run, SingleQueryTopoBeatsBlindOnSharedLlm) {
  ExperimentConfig cfg;
  cfg.profiles = default_profiles();
  EngineProfile llm = cfg.profiles.at("llm");
  llm.instances = 1;
  cfg.profiles.add(llm);
  auto app = AppKind::kAdvancedRagQa;
  auto t = build_app_template(app);
  auto c = default_app_config(app, "q");
  auto latency_with = [&](SchedulerKind s) {
    cfg.scheduler = s;
    return run_single_query(cfg, t, c).queries.at(0).latency();
  };
  SimTime topo = latency_with(SchedulerKind::kTopo);
  EXPECT_LT(topo, latency_with(SchedulerKind::kBlindPo));
  EXPECT_LT(topo, latency_with(SchedulerKind::kBlindTo));
}

}  // namespace
}  // namespace primflow
