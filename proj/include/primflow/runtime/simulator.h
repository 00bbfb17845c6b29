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


#ifndef PRIMFLOW_RUNTIME_SIMULATOR_H_
#define PRIMFLOW_RUNTIME_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/core/graph.h"
#include "primflow/engine/executor.h"
#include "primflow/engine/profile.h"
#include "primflow/runtime/batching.h"
#include "primflow/runtime/query_context.h"

namespace primflow {

enum class SchedulerKind { kTopo, kBlindPo, kBlindTo };

std::string_view scheduler_name(SchedulerKind kind);
std::optional<SchedulerKind> parse_scheduler(std::string_view name);

struct CommModel {
  double hop_ms = 1.0;
  double per_token_ms = 0.00001;
  std::int64_t preschedule_threshold = 4096;
  bool preschedule = true;
};

struct PrescheduleRecord {
  std::string parent;
  std::string child;
  bool same_engine = false;
  bool large_payload = false;

  bool eligible() const { return same_engine || large_payload; }
};

// Whether `child` can be registered at its engine ahead of `parent`'s
// completion so the output skips the scheduler relay.
PrescheduleRecord preschedule(const PGraph& g, const Edge& edge,
                              const CommModel& comm);

// Delay between the parent finishing and the child being queued.
SimTime edge_delay(const PGraph& g, const std::string& parent,
                   const std::string& child, const CommModel& comm);

struct SimOptions {
  SchedulerKind scheduler = SchedulerKind::kTopo;
  CommModel comm;
  std::uint64_t max_events = 50'000'000;
  bool record_trace = true;
};

struct QuerySubmission {
  EGraph egraph;
  SimTime arrival = 0;
  // Simulated optimizer time paid before the sources are queued.
  SimTime build_time = 0;
};

enum class TraceEvent { kEnqueue, kBatch, kStart, kComplete };

std::string_view trace_event_name(TraceEvent e);

struct TraceRecord {
  SimTime at = 0;
  std::string query_id;
  std::string node_id;
  PrimitiveKind kind = PrimitiveKind::kAggregate;
  std::string engine;
  TraceEvent event = TraceEvent::kEnqueue;
  std::int64_t batch_id = -1;

  bool operator==(const TraceRecord&) const = default;
};

struct BatchMember {
  std::string query_id;
  std::string node_id;
  std::int64_t count = 0;

  bool operator==(const BatchMember&) const = default;
};

struct BatchRecord {
  std::int64_t id = 0;
  std::string engine;
  int instance = 0;
  SimTime formed = 0;
  SimTime start = 0;
  SimTime end = 0;
  Phase phase = Phase::kItem;
  std::int64_t load = 0;
  std::int64_t requests = 0;
  // Capacity the batch was checked against (max_slots or decode slots).
  std::int64_t capacity = 0;
  std::vector<BatchMember> members;

  bool operator==(const BatchRecord&) const = default;
};

struct NodeTiming {
  SimTime enqueue = 0;
  SimTime start = 0;
  SimTime complete = 0;
  std::string critical_parent;

  bool operator==(const NodeTiming&) const = default;
};

struct Breakdown {
  SimTime queueing = 0;
  SimTime execution = 0;
  SimTime communication = 0;
  SimTime graph_build = 0;

  SimTime total() const {
    return queueing + execution + communication + graph_build;
  }
  bool operator==(const Breakdown&) const = default;
};

struct QueryResult {
  std::string query_id;
  std::string app_id;
  SimTime submit = 0;
  SimTime finish = 0;
  Breakdown breakdown;
  std::map<std::string, NodeTiming> nodes;

  SimTime latency() const { return finish - submit; }
  bool operator==(const QueryResult&) const = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<BatchRecord> batches;
  std::vector<QueryResult> queries;  // in submission order
  std::map<std::string, SimTime> engine_busy;
  std::map<std::string, int> engine_instances;
  SimTime makespan = 0;
  std::uint64_t events = 0;

  const QueryResult* find(const std::string& query_id) const;
  bool operator==(const Trace&) const = default;
};

// Walks the critical-parent chain back from the last finishing node.
Breakdown compute_breakdown(const QueryResult& q);

// Deterministic discrete-event runtime: per-query graph scheduling over
// per-engine batch schedulers. Events are ordered by (time, sequence); all
// events at one timestamp are applied before batches are formed.
class Simulator {
 public:
  Simulator(const ProfileSet& profiles, SimOptions options);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Throws DuplicateQueryId and InvalidGraph.
  void submit(QuerySubmission submission);
  // Throws NonQuiescent when the event budget runs out and Internal if a
  // query never finishes.
  Trace run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience: a single query submitted at time 0.
Trace simulate_one(const EGraph& e, const ProfileSet& profiles,
                   const SimOptions& options, SimTime build_time = 0);

}  // namespace primflow

#endif  // PRIMFLOW_RUNTIME_SIMULATOR_H_
