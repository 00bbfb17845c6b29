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


#include "primflow/report/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "primflow/core/error.h"
#include "primflow/core/serialize.h"
#include "primflow/optimizer/optimizer.h"

namespace primflow {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t stream_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string passes_text(const PassSet& passes) {
  if (passes.empty()) return "none";
  std::string out;
  for (auto p : kPassOrder) {
    if (!passes.count(p)) continue;
    if (!out.empty()) out += ",";
    out += pass_name(p);
  }
  return out;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

BreakdownMs to_ms(const Breakdown& b) {
  return {primflow::to_ms(b.queueing), primflow::to_ms(b.execution),
          primflow::to_ms(b.communication), primflow::to_ms(b.graph_build)};
}

json stats_json(const LatencyStats& s) {
  return {{"count", s.count},   {"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms},
          {"p95_ms", s.p95_ms}, {"p99_ms", s.p99_ms},   {"max_ms", s.max_ms}};
}

LatencyStats stats_from(const json& j) {
  LatencyStats s;
  s.count = j.at("count").get<std::size_t>();
  s.mean_ms = j.at("mean_ms").get<double>();
  s.p50_ms = j.at("p50_ms").get<double>();
  s.p95_ms = j.at("p95_ms").get<double>();
  s.p99_ms = j.at("p99_ms").get<double>();
  s.max_ms = j.at("max_ms").get<double>();
  return s;
}

json breakdown_json(const BreakdownMs& b) {
  return {{"queueing_ms", b.queueing},
          {"execution_ms", b.execution},
          {"communication_ms", b.communication},
          {"graph_build_ms", b.graph_build}};
}

BreakdownMs breakdown_from(const json& j) {
  return {j.at("queueing_ms").get<double>(), j.at("execution_ms").get<double>(),
          j.at("communication_ms").get<double>(),
          j.at("graph_build_ms").get<double>()};
}

PassSet passes_from(const json& j) {
  if (j.is_string()) return parse_pass_list(j.get<std::string>());
  PassSet out;
  for (const auto& p : j) {
    auto id = parse_pass(p.get<std::string>());
    if (!id) throw Error(ErrorCode::kConfigParse, "unknown pass " + p.dump());
    out.insert(*id);
  }
  return out;
}

WorkloadSpec workload_from(const json& j, const std::string& base_dir) {
  json obj = j;
  if (j.is_string()) {
    obj = json::parse(read_file((fs::path(base_dir) / j.get<std::string>()).string()));
  }
  WorkloadSpec s = parse_workload_spec(obj.dump());
  if (obj.value("use_default_distributions", true)) {
    WorkloadSpec d = default_workload_spec(s.app, s.rate, s.duration_s, s.seed);
    for (const auto& [k, v] : d.params) s.params.emplace(k, v);
    for (const auto& [k, v] : d.conditions) s.conditions.emplace(k, v);
  }
  return s;
}

}  // namespace

std::string_view mode_name(ExecMode mode) {
  switch (mode) {
    case ExecMode::kTeola: return "teola";
    case ExecMode::kChain: return "chain";
    case ExecMode::kChainParallel: return "chain-parallel";
  }
  return "?";
}

std::optional<ExecMode> parse_mode(std::string_view name) {
  for (auto m : {ExecMode::kTeola, ExecMode::kChain, ExecMode::kChainParallel}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
  try {
    ExperimentConfig c;
    c.name = j.value("name", c.name);
    if (j.contains("mode")) {
      auto m = parse_mode(j.at("mode").get<std::string>());
      if (!m) throw Error(ErrorCode::kConfigParse, "unknown mode " + j.at("mode").dump());
      c.mode = *m;
    }
    if (j.contains("scheduler")) {
      auto s = parse_scheduler(j.at("scheduler").get<std::string>());
      if (!s) {
        throw Error(ErrorCode::kConfigParse,
                    "unknown scheduler " + j.at("scheduler").dump());
      }
      c.scheduler = *s;
    }
    if (j.contains("passes")) c.passes = passes_from(j.at("passes"));
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.record_trace = j.value("record_trace", c.record_trace);

    const json prof = j.value("profiles", json("default"));
    if (prof.is_string() && prof.get<std::string>() == "default") {
      c.profiles = default_profiles();
    } else if (prof.is_string()) {
      c.profiles = load_profiles((fs::path(base_dir) / prof.get<std::string>()).string());
    } else {
      c.profiles = parse_profiles(prof.dump());
    }

    if (!j.contains("workloads") || j.at("workloads").empty()) {
      throw Error(ErrorCode::kConfigParse, "no workloads");
    }
    for (const auto& w : j.at("workloads")) {
      c.workloads.push_back(workload_from(w, base_dir));
    }
    if (j.contains("comm")) {
      const auto& m = j.at("comm");
      c.comm.hop_ms = m.value("hop_ms", c.comm.hop_ms);
      c.comm.per_token_ms = m.value("per_token_ms", c.comm.per_token_ms);
      c.comm.preschedule_threshold =
          m.value("preschedule_threshold", c.comm.preschedule_threshold);
      c.comm.preschedule = m.value("preschedule", c.comm.preschedule);
    }
    if (j.contains("build_cost")) {
      const auto& b = j.at("build_cost");
      c.build_cost.base_ms = b.value("base_ms", c.build_cost.base_ms);
      c.build_cost.per_node_ms = b.value("per_node_ms", c.build_cost.per_node_ms);
      c.build_cost.cache_hit_ms = b.value("cache_hit_ms", c.build_cost.cache_hit_ms);
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::string text = read_file(path);
  return parse_experiment_config(text, fs::path(path).parent_path().string());
}

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("TEOLA_SIM_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return cfg.output_dir;
}

LatencyStats latency_stats(std::vector<double> v) {
  LatencyStats s;
  s.count = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  double sum = 0;
  for (double x : v) sum += x;
  s.mean_ms = sum / static_cast<double>(v.size());
  auto rank = [&](double p) {
    auto r = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
    return v[std::clamp<std::size_t>(r, 1, v.size()) - 1];
  };
  s.p50_ms = rank(50);
  s.p95_ms = rank(95);
  s.p99_ms = rank(99);
  s.max_ms = v.back();
  return s;
}

const AppSummary* Report::find_app(const std::string& app_id) const {
  for (const auto& a : apps) {
    if (a.app_id == app_id) return &a;
  }
  return nullptr;
}

SimOptions simulation_options(const ExperimentConfig& cfg) {
  SimOptions opt;
  opt.scheduler = cfg.scheduler;
  opt.comm = cfg.comm;
  // Dependent pre-scheduling is part of the optimized runtime; the chain
  // baselines relay every result through the orchestrator.
  opt.comm.preschedule = cfg.comm.preschedule && cfg.mode == ExecMode::kTeola;
  opt.record_trace = cfg.record_trace;
  return opt;
}

QuerySubmission build_submission(const ExperimentConfig& cfg,
                                 GraphBuilder& builder,
                                 const WorkflowTemplate& t,
                                 const QueryConfig& config) {
  QuerySubmission sub;
  switch (cfg.mode) {
    case ExecMode::kTeola: {
      auto res = builder.build(t, config, cfg.passes);
      double ms = res.cache_hit
                      ? cfg.build_cost.cache_hit_ms
                      : cfg.build_cost.base_ms +
                            cfg.build_cost.per_node_ms *
                                static_cast<double>(res.egraph.graph.nodes.size());
      sub.egraph = std::move(res.egraph);
      sub.build_time = ms_to_sim(ms);
      break;
    }
    case ExecMode::kChain: {
      TransformOptions o;
      o.wiring = Wiring::kSequential;
      sub.egraph = optimize(transform(t, config, o), cfg.profiles, {});
      break;
    }
    case ExecMode::kChainParallel: {
      TransformOptions o;
      o.wiring = Wiring::kComponentData;
      o.prefix_cache = &cfg.profiles;
      sub.egraph = optimize(transform(t, config, o), cfg.profiles, {});
      break;
    }
  }
  return sub;
}

Trace run_single_query(const ExperimentConfig& cfg, const WorkflowTemplate& t,
                       const QueryConfig& config) {
  GraphBuilder builder(cfg.profiles);
  Simulator sim(cfg.profiles, simulation_options(cfg));
  sim.submit(build_submission(cfg, builder, t, config));
  return sim.run();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.workloads.empty()) throw Error(ErrorCode::kConfigParse, "no workloads");

  std::map<std::string, int> app_uses;
  for (const auto& w : cfg.workloads) app_uses[std::string(app_name(w.app))]++;

  std::vector<std::vector<QueryArrival>> streams;
  std::map<std::string, double> rate_of;
  for (std::size_t i = 0; i < cfg.workloads.size(); ++i) {
    WorkloadSpec spec = cfg.workloads[i];
    spec.seed = stream_seed(cfg.seed, i);
    auto stream = generate_workload(spec);
    const std::string app(app_name(spec.app));
    for (auto& q : stream) {
      if (app_uses[app] > 1) {
        q.config.query_id = "s" + std::to_string(i) + "/" + q.config.query_id;
      }
      rate_of[q.config.query_id] = spec.rate;
    }
    streams.push_back(std::move(stream));
  }
  auto arrivals = colocate(streams);

  std::map<AppKind, WorkflowTemplate> templates;
  for (const auto& w : cfg.workloads) {
    templates.emplace(w.app, build_app_template(w.app));
  }

  GraphBuilder builder(cfg.profiles);
  Simulator sim(cfg.profiles, simulation_options(cfg));

  for (const auto& q : arrivals) {
    const auto& t = templates.at(q.app);
    QuerySubmission sub = build_submission(cfg, builder, t, q.config);
    sub.arrival = q.at;
    sim.submit(std::move(sub));
  }

  ExperimentResult out;
  out.trace = sim.run();
  Report& r = out.report;
  r.name = cfg.name;
  r.mode = std::string(mode_name(cfg.mode));
  r.scheduler = std::string(scheduler_name(cfg.scheduler));
  r.passes = cfg.mode == ExecMode::kTeola ? passes_text(cfg.passes) : "none";
  r.seed = cfg.seed;
  r.cache_hits = builder.hits();
  r.cache_misses = builder.misses();
  r.makespan_ms = primflow::to_ms(out.trace.makespan);

  std::vector<double> all;
  std::map<std::pair<std::string, double>, std::vector<const QueryRow*>> groups;
  for (const auto& q : out.trace.queries) {
    QueryRow row;
    row.query_id = q.query_id;
    row.app_id = q.app_id;
    row.rate = rate_of.at(q.query_id);
    row.submit_ms = primflow::to_ms(q.submit);
    row.latency_ms = primflow::to_ms(q.latency());
    row.breakdown = to_ms(q.breakdown);
    r.queries.push_back(row);
  }
  for (const auto& row : r.queries) {
    all.push_back(row.latency_ms);
    groups[{row.app_id, row.rate}].push_back(&row);
  }
  r.overall = latency_stats(all);
  for (const auto& [key, rows] : groups) {
    AppSummary a;
    a.app_id = key.first;
    a.rate = key.second;
    std::vector<double> lat;
    for (const auto* row : rows) {
      lat.push_back(row->latency_ms);
      a.mean_breakdown.queueing += row->breakdown.queueing;
      a.mean_breakdown.execution += row->breakdown.execution;
      a.mean_breakdown.communication += row->breakdown.communication;
      a.mean_breakdown.graph_build += row->breakdown.graph_build;
    }
    const double n = static_cast<double>(rows.size());
    a.mean_breakdown.queueing /= n;
    a.mean_breakdown.execution /= n;
    a.mean_breakdown.communication /= n;
    a.mean_breakdown.graph_build /= n;
    a.stats = latency_stats(std::move(lat));
    r.apps.push_back(a);
  }
  for (const auto& [engine, busy] : out.trace.engine_busy) {
    double denom = static_cast<double>(out.trace.makespan) *
                   out.trace.engine_instances.at(engine);
    r.utilization[engine] = denom > 0 ? static_cast<double>(busy) / denom : 0.0;
  }
  return out;
}

std::optional<ReportFormat> parse_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  if (name == "md" || name == "md-table") return ReportFormat::kMarkdown;
  return std::nullopt;
}

std::string report_csv(const Report& r) {
  std::string out =
      "query_id,app_id,rate,submit_ms,latency_ms,queueing_ms,execution_ms,"
      "communication_ms,graph_build_ms\n";
  for (const auto& q : r.queries) {
    out += q.query_id + "," + q.app_id + "," + fmt(q.rate) + "," +
           fmt(q.submit_ms) + "," + fmt(q.latency_ms) + "," +
           fmt(q.breakdown.queueing) + "," + fmt(q.breakdown.execution) + "," +
           fmt(q.breakdown.communication) + "," + fmt(q.breakdown.graph_build) +
           "\n";
  }
  return out;
}

std::string report_json(const Report& r) {
  json queries = json::array();
  for (const auto& q : r.queries) {
    queries.push_back({{"query_id", q.query_id},
                       {"app_id", q.app_id},
                       {"rate", q.rate},
                       {"submit_ms", q.submit_ms},
                       {"latency_ms", q.latency_ms},
                       {"breakdown", breakdown_json(q.breakdown)}});
  }
  json apps = json::array();
  for (const auto& a : r.apps) {
    apps.push_back({{"app_id", a.app_id},
                    {"rate", a.rate},
                    {"stats", stats_json(a.stats)},
                    {"mean_breakdown", breakdown_json(a.mean_breakdown)}});
  }
  json j{{"name", r.name},
         {"mode", r.mode},
         {"scheduler", r.scheduler},
         {"passes", r.passes},
         {"seed", r.seed},
         {"overall", stats_json(r.overall)},
         {"apps", apps},
         {"utilization", r.utilization},
         {"makespan_ms", r.makespan_ms},
         {"cache_hits", r.cache_hits},
         {"cache_misses", r.cache_misses},
         {"queries", queries}};
  return j.dump(2) + "\n";
}

Report parse_report_json(std::string_view text) {
  try {
    json j = json::parse(text);
    Report r;
    r.name = j.at("name").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.scheduler = j.at("scheduler").get<std::string>();
    r.passes = j.at("passes").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.overall = stats_from(j.at("overall"));
    for (const auto& a : j.at("apps")) {
      r.apps.push_back({a.at("app_id").get<std::string>(),
                        a.at("rate").get<double>(), stats_from(a.at("stats")),
                        breakdown_from(a.at("mean_breakdown"))});
    }
    r.utilization = j.at("utilization").get<std::map<std::string, double>>();
    r.makespan_ms = j.at("makespan_ms").get<double>();
    r.cache_hits = j.at("cache_hits").get<std::size_t>();
    r.cache_misses = j.at("cache_misses").get<std::size_t>();
    for (const auto& q : j.at("queries")) {
      r.queries.push_back({q.at("query_id").get<std::string>(),
                           q.at("app_id").get<std::string>(),
                           q.at("rate").get<double>(),
                           q.at("submit_ms").get<double>(),
                           q.at("latency_ms").get<double>(),
                           breakdown_from(q.at("breakdown"))});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
}

std::string report_markdown(const Report& r) {
  std::string out = "## " + r.name + " (" + r.mode + ", " + r.scheduler +
                    ", passes: " + r.passes + ")\n\n";
  out +=
      "| app | rate | queries | mean (ms) | p50 | p95 | p99 | queueing | "
      "execution | communication | graph build |\n"
      "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& a : r.apps) {
    out += "| " + a.app_id + " | " + fmt(a.rate, 2) + " | " +
           std::to_string(a.stats.count) + " | " + fmt(a.stats.mean_ms, 1) +
           " | " + fmt(a.stats.p50_ms, 1) + " | " + fmt(a.stats.p95_ms, 1) +
           " | " + fmt(a.stats.p99_ms, 1) + " | " +
           fmt(a.mean_breakdown.queueing, 1) + " | " +
           fmt(a.mean_breakdown.execution, 1) + " | " +
           fmt(a.mean_breakdown.communication, 1) + " | " +
           fmt(a.mean_breakdown.graph_build, 2) + " |\n";
  }
  out += "\n| engine | utilization |\n|---|---|\n";
  for (const auto& [e, u] : r.utilization) {
    out += "| " + e + " | " + fmt(u, 3) + " |\n";
  }
  return out;
}

std::string emit_report(const Report& r, ReportFormat format,
                        const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, dir + ": " + ec.message());
  std::string path;
  switch (format) {
    case ReportFormat::kCsv:
      path = (fs::path(dir) / (r.name + ".queries.csv")).string();
      write_file(path, report_csv(r));
      break;
    case ReportFormat::kJson:
      path = (fs::path(dir) / (r.name + ".report.json")).string();
      write_file(path, report_json(r));
      break;
    case ReportFormat::kMarkdown:
      path = (fs::path(dir) / (r.name + ".summary.md")).string();
      write_file(path, report_markdown(r));
      break;
  }
  return path;
}

std::string emit_trace(const Report& r, const Trace& t, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, dir + ": " + ec.message());
  std::string out;
  for (const auto& rec : t.records) {
    json j{{"timestamp_ms", primflow::to_ms(rec.at)},
           {"query_id", rec.query_id},
           {"node_id", rec.node_id},
           {"kind", kind_name(rec.kind)},
           {"engine", rec.engine},
           {"event", trace_event_name(rec.event)}};
    if (rec.batch_id >= 0) j["batch"] = rec.batch_id;
    out += j.dump() + "\n";
  }
  std::string path = (fs::path(dir) / (r.name + ".trace.jsonl")).string();
  write_file(path, out);
  return path;
}

std::vector<SpeedupRow> compare_reports(const Report& baseline,
                                        const Report& candidate) {
  std::vector<SpeedupRow> rows;
  for (const auto& b : baseline.apps) {
    for (const auto& c : candidate.apps) {
      if (b.app_id != c.app_id || b.rate != c.rate) continue;
      SpeedupRow row{b.app_id, b.rate, b.stats.mean_ms, c.stats.mean_ms, 0};
      row.speedup = c.stats.mean_ms > 0 ? b.stats.mean_ms / c.stats.mean_ms : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string speedup_markdown(const std::vector<SpeedupRow>& rows,
                             const std::string& baseline_name,
                             const std::string& candidate_name) {
  std::string out = "| app | rate | " + baseline_name + " mean (ms) | " +
                    candidate_name + " mean (ms) | speedup |\n"
                    "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + r.app_id + " | " + fmt(r.rate, 2) + " | " +
           fmt(r.baseline_mean_ms, 1) + " | " + fmt(r.candidate_mean_ms, 1) +
           " | " + fmt(r.speedup, 2) + "x |\n";
  }
  return out;
}

std::vector<ExperimentResult> run_sweep(const ExperimentConfig& base,
                                        const SweepSpec& sweep) {
  std::vector<ExecMode> modes = sweep.modes;
  if (modes.empty()) modes = {base.mode};
  std::vector<SchedulerKind> scheds = sweep.schedulers;
  if (scheds.empty()) scheds = {base.scheduler};
  std::vector<std::optional<double>> rates;
  for (double r : sweep.rates) rates.emplace_back(r);
  if (rates.empty()) rates.emplace_back(std::nullopt);

  std::vector<ExperimentConfig> configs;
  for (auto m : modes) {
    for (auto s : scheds) {
      for (const auto& rate : rates) {
        ExperimentConfig c = base;
        c.mode = m;
        c.scheduler = s;
        c.name = base.name + "-" + std::string(mode_name(m)) + "-" +
                 std::string(scheduler_name(s));
        if (rate) {
          for (auto& w : c.workloads) w.rate = *rate;
          c.name += "-r" + fmt(*rate, 2);
        }
        configs.push_back(std::move(c));
      }
    }
  }
  std::vector<std::future<ExperimentResult>> futures;
  for (const auto& c : configs) {
    futures.push_back(std::async(std::launch::async,
                                 [&c]() { return run_experiment(c); }));
  }
  std::vector<ExperimentResult> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace primflow
