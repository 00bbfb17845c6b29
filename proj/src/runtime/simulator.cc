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


#include "primflow/runtime/simulator.h"

#include <algorithm>
#include <queue>
#include <set>
#include <tuple>

#include "primflow/core/error.h"

namespace primflow {

std::string_view scheduler_name(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kTopo: return "topo";
    case SchedulerKind::kBlindPo: return "blind-po";
    case SchedulerKind::kBlindTo: return "blind-to";
  }
  return "?";
}

std::optional<SchedulerKind> parse_scheduler(std::string_view name) {
  for (auto k : {SchedulerKind::kTopo, SchedulerKind::kBlindPo,
                 SchedulerKind::kBlindTo}) {
    if (scheduler_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view trace_event_name(TraceEvent e) {
  switch (e) {
    case TraceEvent::kEnqueue: return "enqueue";
    case TraceEvent::kBatch: return "batch";
    case TraceEvent::kStart: return "start";
    case TraceEvent::kComplete: return "complete";
  }
  return "?";
}

PrescheduleRecord preschedule(const PGraph& g, const Edge& edge,
                              const CommModel& comm) {
  const auto& p = g.node(edge.from);
  const auto& c = g.node(edge.to);
  PrescheduleRecord r{edge.from, edge.to, false, false};
  if (!comm.preschedule || is_control_flow(p.kind) || is_control_flow(c.kind)) {
    return r;
  }
  r.same_engine = p.meta.engine_id == c.meta.engine_id;
  r.large_payload = p.meta.payload_tokens >= comm.preschedule_threshold;
  return r;
}

SimTime edge_delay(const PGraph& g, const std::string& parent,
                   const std::string& child, const CommModel& comm) {
  const auto& p = g.node(parent);
  const auto& c = g.node(child);
  const double transfer =
      comm.per_token_ms * static_cast<double>(p.meta.payload_tokens);
  const bool pc = is_control_flow(p.kind);
  const bool cc = is_control_flow(c.kind);
  if (pc && cc) return 0;
  if (pc || cc) return ms_to_sim(comm.hop_ms + transfer);
  // Relayed results go engine -> scheduler -> engine; pre-scheduled ones
  // travel straight to the child's engine.
  bool direct = preschedule(g, {parent, child, ""}, comm).eligible();
  return ms_to_sim((direct ? 1.0 : 2.0) * comm.hop_ms + transfer);
}

const QueryResult* Trace::find(const std::string& query_id) const {
  for (const auto& q : queries) {
    if (q.query_id == query_id) return &q;
  }
  return nullptr;
}

Breakdown compute_breakdown(const QueryResult& q) {
  Breakdown b;
  if (q.nodes.empty()) return b;
  std::string last;
  SimTime latest = -1;
  for (const auto& [id, t] : q.nodes) {
    if (t.complete > latest) {
      latest = t.complete;
      last = id;
    }
  }
  std::string cur = last;
  SimTime sources_at = q.submit;
  for (std::size_t guard = 0; guard <= q.nodes.size(); ++guard) {
    const auto& t = q.nodes.at(cur);
    b.execution += t.complete - t.start;
    b.queueing += t.start - t.enqueue;
    if (t.critical_parent.empty()) {
      sources_at = t.enqueue;
      break;
    }
    b.communication += t.enqueue - q.nodes.at(t.critical_parent).complete;
    cur = t.critical_parent;
  }
  b.graph_build = sources_at - q.submit;
  return b;
}

namespace {

enum class EvType { kSubmit, kEnqueue, kRequestDone, kInstanceFree, kWake };

struct Event {
  SimTime at = 0;
  std::uint64_t seq = 0;
  EvType type = EvType::kSubmit;
  std::string query;
  std::string node;
  std::string engine;
  int instance = 0;
  std::int64_t batch = -1;
  std::size_t request = 0;
  int segment = 0;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
  }
};

}  // namespace

struct Simulator::Impl {
  struct EngineState {
    const EngineProfile* profile = nullptr;
    std::vector<EngineInstance> instances;
    std::vector<QueueEntry> queue;
    SlotBudget budget;
    std::optional<SimTime> wake;
  };

  struct QueryState {
    std::unique_ptr<QueryContext> ctx;
    QueryResult result;
    SimTime build = 0;
    std::map<std::string, SimTime> arrival;
    std::map<std::string, std::int64_t> done_count;
    std::set<std::string> fused;
    std::vector<std::tuple<std::string, int, std::int64_t>> kv;
    bool finished = false;
  };

  struct InFlight {
    BatchRecord record;
    std::vector<BatchRequest> requests;
    // Per request: the node finished by each segment.
    std::vector<std::vector<std::string>> segment_nodes;
  };

  const ProfileSet& profiles;
  SimOptions opt;
  std::map<std::string, EngineState> engines;
  std::map<std::string, QueryState> queries;
  std::vector<std::string> order;
  std::vector<QuerySubmission> pending;
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  std::map<std::int64_t, InFlight> inflight;
  std::set<std::string> dirty;
  Trace trace;
  std::uint64_t seq = 0;
  std::int64_t next_batch = 0;

  Impl(const ProfileSet& p, SimOptions o) : profiles(p), opt(o) {
    for (const auto& [id, prof] : profiles.all()) {
      EngineState st;
      st.profile = &prof;
      for (int i = 0; i < prof.instances; ++i) {
        EngineInstance inst;
        inst.instance_id = i;
        st.instances.push_back(inst);
      }
      const std::int64_t beff = max_efficient_batch(prof);
      st.budget.slots = beff;
      st.budget.hard_cap = prof.max_slots;
      st.budget.decode_slots = prof.max_decode_batch;
      if (opt.scheduler != SchedulerKind::kTopo) {
        st.budget.max_requests = prof.blind_max_requests;
      }
      engines.emplace(id, std::move(st));
      trace.engine_busy[id] = 0;
      trace.engine_instances[id] = prof.instances;
    }
  }

  void push(Event e) {
    e.seq = seq++;
    events.push(std::move(e));
  }

  void record(SimTime at, const std::string& q, const PrimitiveNode& n,
              TraceEvent ev, std::int64_t batch = -1) {
    if (!opt.record_trace) return;
    trace.records.push_back({at, q, n.node_id, n.kind, n.meta.engine_id, ev,
                             batch});
  }

  void on_submit(const Event& ev) {
    auto& qs = queries.at(ev.query);
    for (const auto& id : qs.ctx->ready_nodes()) {
      SimTime at = ev.at + qs.build;
      qs.arrival[id] = at;
      push({at, 0, EvType::kEnqueue, ev.query, id});
    }
  }

  std::vector<std::string> decode_chain(const QueryContext& ctx,
                                        const std::string& head) {
    std::vector<std::string> chain{head};
    const auto& g = ctx.graph();
    while (true) {
      const auto& cur = g.node(chain.back());
      std::string next;
      for (const auto& c : ctx.children(cur.node_id)) {
        const auto& cn = g.node(c);
        if (cn.kind == PrimitiveKind::kPartialDecoding &&
            cn.meta.stage_of == cur.meta.stage_of &&
            cn.meta.stage_index == cur.meta.stage_index + 1 &&
            cn.meta.engine_id == cur.meta.engine_id &&
            ctx.parents(c).size() == 1) {
          next = c;
        }
      }
      if (next.empty()) break;
      chain.push_back(next);
    }
    return chain;
  }

  void on_enqueue(const Event& ev) {
    auto& qs = queries.at(ev.query);
    auto& ctx = *qs.ctx;
    const auto& n = ctx.graph().node(ev.node);
    ctx.mark_dispatched(ev.node);
    auto& timing = qs.result.nodes[ev.node];
    timing.enqueue = ev.at;
    record(ev.at, ev.query, n, TraceEvent::kEnqueue);
    if (is_control_flow(n.kind)) {
      // Runs on the orchestrator itself.
      timing.start = ev.at;
      record(ev.at, ev.query, n, TraceEvent::kStart);
      complete_node(qs, ev.query, ev.node, ev.at);
      return;
    }
    auto it = engines.find(n.meta.engine_id);
    if (it == engines.end()) {
      throw Error(ErrorCode::kProfileMissing,
                  ev.node + " targets unknown engine " + n.meta.engine_id);
    }
    QueueEntry e;
    e.query_id = ev.query;
    e.node_id = ev.node;
    e.kind = n.kind;
    e.arrival = ev.at;
    e.depth = ctx.egraph().depth.at(ev.node);
    e.remaining = n.meta.batch_items;
    e.load_per_request = n.load_per_request();
    e.prefix_tokens = n.meta.prefix_tokens;
    e.seq = seq++;
    if (is_decode_like(n.kind)) {
      if (n.kind == PrimitiveKind::kPartialDecoding) {
        auto chain = decode_chain(ctx, ev.node);
        for (std::size_t i = 0; i < chain.size(); ++i) {
          e.segments.push_back(ctx.graph().node(chain[i]).meta.decode_tokens);
          if (i > 0) qs.fused.insert(chain[i]);
        }
      } else {
        e.segments.push_back(n.meta.decode_tokens);
      }
    }
    it->second.queue.push_back(std::move(e));
    dirty.insert(n.meta.engine_id);
  }

  void complete_node(QueryState& qs, const std::string& q,
                     const std::string& node, SimTime t) {
    auto& ctx = *qs.ctx;
    const auto& g = ctx.graph();
    auto& timing = qs.result.nodes[node];
    timing.complete = t;
    record(t, q, g.node(node), TraceEvent::kComplete);
    auto ready = ctx.on_primitive_complete(node, t);
    for (const auto& c : ctx.children(node)) {
      SimTime cand = t + edge_delay(g, node, c, opt.comm);
      auto [it, inserted] = qs.arrival.emplace(c, cand);
      if (inserted || cand >= it->second) {
        it->second = cand;
        qs.result.nodes[c].critical_parent = node;
      }
    }
    for (const auto& c : ready) {
      if (qs.fused.count(c)) {
        // Already decoding inside its chain head's request.
        ctx.mark_dispatched(c);
        auto& ct = qs.result.nodes[c];
        ct.enqueue = t;
        ct.start = t;
        ct.critical_parent = node;
        record(t, q, g.node(c), TraceEvent::kEnqueue);
        record(t, q, g.node(c), TraceEvent::kStart);
        continue;
      }
      push({qs.arrival.at(c), 0, EvType::kEnqueue, q, c});
    }
    if (ctx.done() && !qs.finished) {
      qs.finished = true;
      qs.result.finish = t;
      for (const auto& [engine, inst, tokens] : qs.kv) {
        engines.at(engine).instances[static_cast<std::size_t>(inst)].kv_occupied -=
            tokens;
      }
      qs.kv.clear();
    }
  }

  void on_request_done(const Event& ev) {
    auto& fl = inflight.at(ev.batch);
    const auto& req = fl.requests[ev.request];
    const auto& node = fl.segment_nodes[ev.request][static_cast<std::size_t>(ev.segment)];
    auto& qs = queries.at(req.query_id);
    auto& done = qs.done_count[node];
    done += req.count;
    if (done == qs.ctx->graph().node(node).meta.batch_items) {
      complete_node(qs, req.query_id, node, ev.at);
    }
  }

  void on_instance_free(const Event& ev) {
    auto& st = engines.at(ev.engine);
    release_instance(st.instances[static_cast<std::size_t>(ev.instance)]);
    inflight.erase(ev.batch);
    dirty.insert(ev.engine);
  }

  void dispatch(const std::string& engine_id, SimTime now) {
    auto& st = engines.at(engine_id);
    const auto& prof = *st.profile;
    while (!st.queue.empty()) {
      auto inst = select_instance(st.instances, prof);
      if (!inst) break;
      BatchPlan plan;
      if (opt.scheduler == SchedulerKind::kTopo) {
        plan = form_batch_topo(st.queue, st.budget);
      } else {
        BlindParams bp;
        bp.budget = st.budget;
        bp.timeout = ms_to_sim(prof.blind_timeout_ms);
        bp.per_invocation = opt.scheduler == SchedulerKind::kBlindPo;
        std::optional<SimTime> wake;
        plan = form_batch_blind(st.queue, bp, now, &wake);
        if (plan.empty() && wake && (!st.wake || *wake < *st.wake)) {
          st.wake = *wake;
          push({*wake, 0, EvType::kWake, "", "", engine_id});
        }
      }
      if (plan.empty()) break;
      launch(engine_id, st, *inst, plan, now);
    }
  }

  void launch(const std::string& engine_id, EngineState& st, int inst,
              const BatchPlan& plan, SimTime now) {
    const auto& prof = *st.profile;
    InFlight fl;
    Batch batch;
    fl.record.id = next_batch++;
    fl.record.engine = engine_id;
    fl.record.instance = inst;
    fl.record.formed = now;
    fl.record.phase = plan.phase;
    fl.record.capacity =
        plan.phase == Phase::kDecode ? prof.max_decode_batch : prof.max_slots;
    for (const auto& pick : plan.picks) {
      auto& e = st.queue[pick.entry];
      BatchRequest r{e.query_id, e.node_id, e.kind, pick.count,
                     e.load_per_request, e.prefix_tokens, e.segments};
      auto& qs = queries.at(e.query_id);
      std::vector<std::string> seg_nodes{e.node_id};
      if (e.segments.size() > 1) {
        seg_nodes = decode_chain(*qs.ctx, e.node_id);
      }
      fl.segment_nodes.push_back(std::move(seg_nodes));
      fl.record.members.push_back({e.query_id, e.node_id, pick.count});
      batch.requests.push_back(std::move(r));
      e.remaining -= pick.count;
    }
    BatchResult res = execute_batch(st.instances[static_cast<std::size_t>(inst)],
                                    prof, batch, now);
    fl.record.start = res.start;
    fl.record.end = res.end;
    fl.record.load = batch.load();
    fl.record.requests = batch.request_count();
    fl.requests = batch.requests;
    for (const auto& r : batch.requests) {
      auto& qs = queries.at(r.query_id);
      const auto& n = qs.ctx->graph().node(r.node_id);
      record(now, r.query_id, n, TraceEvent::kBatch, fl.record.id);
      auto& timing = qs.result.nodes[r.node_id];
      if (qs.done_count.find(r.node_id) == qs.done_count.end()) {
        qs.done_count[r.node_id] = 0;
        timing.start = now;
        record(now, r.query_id, n, TraceEvent::kStart, fl.record.id);
      }
      if (prof.is_llm() && is_prefill_like(r.kind)) {
        std::int64_t tokens = r.count * r.load_per_request;
        qs.kv.emplace_back(engine_id, inst, tokens);
      }
    }
    for (const auto& ce : res.events) {
      Event ev{ce.at, 0, EvType::kRequestDone, "", "", engine_id, inst,
               fl.record.id, ce.request_index, ce.segment};
      push(std::move(ev));
    }
    push({res.end, 0, EvType::kInstanceFree, "", "", engine_id, inst,
          fl.record.id});
    trace.engine_busy[engine_id] += res.end - res.start;
    if (opt.record_trace) trace.batches.push_back(fl.record);
    std::erase_if(st.queue, [](const QueueEntry& e) { return e.remaining <= 0; });
    inflight.emplace(fl.record.id, std::move(fl));
  }

  Trace run() {
    for (auto& sub : pending) {
      std::string q = sub.egraph.graph.query_id;
      QueryState qs;
      qs.build = sub.build_time;
      qs.result.query_id = q;
      qs.result.app_id = sub.egraph.graph.app_id;
      qs.result.submit = sub.arrival;
      qs.ctx = std::make_unique<QueryContext>(std::move(sub.egraph), sub.arrival);
      queries.emplace(q, std::move(qs));
      push({sub.arrival, 0, EvType::kSubmit, q});
    }
    pending.clear();

    std::uint64_t handled = 0;
    while (!events.empty()) {
      const SimTime now = events.top().at;
      while (!events.empty() && events.top().at == now) {
        Event ev = events.top();
        events.pop();
        if (++handled > opt.max_events) {
          throw Error(ErrorCode::kNonQuiescent,
                      "event budget of " + std::to_string(opt.max_events) +
                          " exhausted");
        }
        switch (ev.type) {
          case EvType::kSubmit: on_submit(ev); break;
          case EvType::kEnqueue: on_enqueue(ev); break;
          case EvType::kRequestDone: on_request_done(ev); break;
          case EvType::kInstanceFree: on_instance_free(ev); break;
          case EvType::kWake: {
            auto& st = engines.at(ev.engine);
            if (st.wake && *st.wake == ev.at) st.wake.reset();
            dirty.insert(ev.engine);
            break;
          }
        }
      }
      std::set<std::string> todo;
      todo.swap(dirty);
      for (const auto& id : todo) dispatch(id, now);
      trace.makespan = std::max(trace.makespan, now);
    }
    trace.events = handled;

    for (const auto& q : order) {
      auto& qs = queries.at(q);
      if (!qs.finished) {
        throw Error(ErrorCode::kInternal, "query " + q + " did not finish");
      }
      qs.result.breakdown = compute_breakdown(qs.result);
      trace.queries.push_back(qs.result);
    }
    return std::move(trace);
  }
};

Simulator::Simulator(const ProfileSet& profiles, SimOptions options)
    : impl_(std::make_unique<Impl>(profiles, options)) {}

Simulator::~Simulator() = default;

void Simulator::submit(QuerySubmission submission) {
  const std::string& q = submission.egraph.graph.query_id;
  if (std::find(impl_->order.begin(), impl_->order.end(), q) !=
      impl_->order.end()) {
    throw Error(ErrorCode::kDuplicateQueryId, q);
  }
  if (submission.egraph.depth.size() != submission.egraph.graph.nodes.size()) {
    submission.egraph.depth = assign_depths(submission.egraph.graph);
  }
  validate_egraph(submission.egraph);
  impl_->order.push_back(q);
  impl_->pending.push_back(std::move(submission));
}

Trace Simulator::run() { return impl_->run(); }

Trace simulate_one(const EGraph& e, const ProfileSet& profiles,
                   const SimOptions& options, SimTime build_time) {
  Simulator sim(profiles, options);
  sim.submit({e, 0, build_time});
  return sim.run();
}

}  // namespace primflow
