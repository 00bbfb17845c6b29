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


#ifndef PRIMFLOW_REPORT_EXPERIMENT_H_
#define PRIMFLOW_REPORT_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/engine/profile.h"
#include "primflow/optimizer/optimizer.h"
#include "primflow/optimizer/passes.h"
#include "primflow/runtime/simulator.h"
#include "primflow/workloads/workload.h"

namespace primflow {

// teola: template wiring + optimization passes + graph-build cost.
// chain: one module at a time, no passes.
// chain-parallel: module-level parallelism + prefix-cache discount.
enum class ExecMode { kTeola, kChain, kChainParallel };

std::string_view mode_name(ExecMode mode);
std::optional<ExecMode> parse_mode(std::string_view name);

// Simulated optimizer cost charged to each query in teola mode.
struct BuildCost {
  double base_ms = 2.0;
  double per_node_ms = 0.05;
  double cache_hit_ms = 0.2;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExecMode mode = ExecMode::kTeola;
  SchedulerKind scheduler = SchedulerKind::kTopo;
  PassSet passes = all_passes();
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  // Each stream is seeded from the experiment seed and its position.
  std::vector<WorkloadSpec> workloads;
  ProfileSet profiles;
  CommModel comm;
  BuildCost build_cost;
  bool record_trace = true;
};

// Paths inside the config (profiles, workload files) resolve relative to
// base_dir. "profiles": "default" selects the built-in set.
// Throws ConfigParse, UnknownApp, ProfileMissing, IoFailure.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

// Output directory after the TEOLA_SIM_OUTPUT_DIR override.
std::string resolve_output_dir(const ExperimentConfig& cfg);

struct LatencyStats {
  std::size_t count = 0;
  double mean_ms = 0;
  double p50_ms = 0;
  double p95_ms = 0;
  double p99_ms = 0;
  double max_ms = 0;

  bool operator==(const LatencyStats&) const = default;
};

// Nearest-rank percentiles.
LatencyStats latency_stats(std::vector<double> latencies_ms);

struct BreakdownMs {
  double queueing = 0;
  double execution = 0;
  double communication = 0;
  double graph_build = 0;

  double total() const {
    return queueing + execution + communication + graph_build;
  }
  bool operator==(const BreakdownMs&) const = default;
};

struct QueryRow {
  std::string query_id;
  std::string app_id;
  double rate = 0;
  double submit_ms = 0;
  double latency_ms = 0;
  BreakdownMs breakdown;

  bool operator==(const QueryRow&) const = default;
};

struct AppSummary {
  std::string app_id;
  double rate = 0;
  LatencyStats stats;
  BreakdownMs mean_breakdown;

  bool operator==(const AppSummary&) const = default;
};

struct Report {
  std::string name;
  std::string mode;
  std::string scheduler;
  std::string passes;
  std::uint64_t seed = 0;
  std::vector<QueryRow> queries;
  std::vector<AppSummary> apps;
  LatencyStats overall;
  std::map<std::string, double> utilization;
  double makespan_ms = 0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;

  const AppSummary* find_app(const std::string& app_id) const;
  bool operator==(const Report&) const = default;
};

struct ExperimentResult {
  Report report;
  Trace trace;
};

// Simulator settings implied by cfg (pre-scheduling only in teola mode).
SimOptions simulation_options(const ExperimentConfig& cfg);

// The graph cfg.mode executes for one query, with its simulated build time.
// Arrival is left at 0.
QuerySubmission build_submission(const ExperimentConfig& cfg,
                                 GraphBuilder& builder,
                                 const WorkflowTemplate& t,
                                 const QueryConfig& config);

// One query of any template, submitted at t = 0; cfg.workloads is ignored.
Trace run_single_query(const ExperimentConfig& cfg, const WorkflowTemplate& t,
                       const QueryConfig& config);

// Deterministic for a fixed config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { kCsv, kJson, kMarkdown };

std::optional<ReportFormat> parse_format(std::string_view name);

std::string report_csv(const Report& r);
std::string report_json(const Report& r);
std::string report_markdown(const Report& r);
Report parse_report_json(std::string_view text);

// Writes <dir>/<name>.{queries.csv|report.json|summary.md}. Returns the
// path. Throws IoFailure.
std::string emit_report(const Report& r, ReportFormat format,
                        const std::string& dir);
// Line-delimited JSON trace records. Throws IoFailure.
std::string emit_trace(const Report& r, const Trace& t, const std::string& dir);

struct SpeedupRow {
  std::string app_id;
  double rate = 0;
  double baseline_mean_ms = 0;
  double candidate_mean_ms = 0;
  double speedup = 0;  // baseline / candidate
};

// One row per (app, rate) present in both reports.
std::vector<SpeedupRow> compare_reports(const Report& baseline,
                                        const Report& candidate);
std::string speedup_markdown(const std::vector<SpeedupRow>& rows,
                             const std::string& baseline_name,
                             const std::string& candidate_name);

struct SweepSpec {
  std::vector<double> rates;        // empty = keep each workload's rate
  std::vector<ExecMode> modes;      // empty = keep cfg.mode
  std::vector<SchedulerKind> schedulers;
};

// Runs the cross product concurrently; results in (mode, scheduler, rate)
// order. Names are "<name>-<mode>-<scheduler>-r<rate>".
std::vector<ExperimentResult> run_sweep(const ExperimentConfig& base,
                                        const SweepSpec& sweep);

}  // namespace primflow

#endif  // PRIMFLOW_REPORT_EXPERIMENT_H_
