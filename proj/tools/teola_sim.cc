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


// teola-sim: command-line driver for the simulator.
//
//   teola-sim run -c exp.json
//   teola-sim sweep -c exp.json --rates 1,2,4 --modes teola,chain
//   teola-sim graph build --app advanced-rag
//   teola-sim graph diff a.json b.json
//   teola-sim report compare base.report.json cand.report.json
//
// Exit status: 0 on success, 1 when `graph diff` finds a difference, 2 on
// bad usage, 10 + ErrorCode for library errors.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "primflow/core/error.h"
#include "primflow/core/isomorphism.h"
#include "primflow/core/serialize.h"
#include "primflow/optimizer/optimizer.h"
#include "primflow/report/experiment.h"
#include "primflow/workloads/apps.h"

namespace pf = primflow;

namespace {

constexpr int kExitDiffers = 1;
constexpr int kExitUsage = 2;
constexpr int kExitErrorBase = 10;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<pf::ReportFormat> parse_formats(const std::string& list) {
  std::vector<pf::ReportFormat> out;
  for (const auto& f : split_list(list)) {
    auto fmt = pf::parse_format(f);
    if (!fmt) throw pf::Error(pf::ErrorCode::kConfigParse, "format " + f);
    out.push_back(*fmt);
  }
  return out;
}

void emit_all(const pf::ExperimentResult& r,
              const std::vector<pf::ReportFormat>& formats,
              const std::string& dir, bool trace) {
  for (auto f : formats) {
    std::cerr << "wrote " << pf::emit_report(r.report, f, dir) << "\n";
  }
  if (trace) std::cerr << "wrote " << pf::emit_trace(r.report, r.trace, dir) << "\n";
}

struct RunArgs {
  std::string config;
  std::string formats = "csv,json,md";
  bool no_trace = false;
  std::string seed;
};

struct SweepArgs {
  RunArgs run;
  std::string rates;
  std::string modes;
  std::string schedulers;
};

struct BuildArgs {
  std::string app = "advanced-rag";
  std::string query_config;
  std::string profiles;
  std::string mode = "teola";
  std::string passes = "all";
  std::string output;
};

struct DiffArgs {
  std::string a;
  std::string b;
  std::string labels = "kind-engine";
};

struct CompareArgs {
  std::string baseline;
  std::string candidate;
};

pf::ExperimentConfig load_run_config(const RunArgs& a) {
  auto cfg = pf::load_experiment_config(a.config);
  if (!a.seed.empty()) cfg.seed = std::stoull(a.seed);
  cfg.record_trace = !a.no_trace;
  return cfg;
}

int cmd_run(const RunArgs& a) {
  auto cfg = load_run_config(a);
  auto result = pf::run_experiment(cfg);
  emit_all(result, parse_formats(a.formats), pf::resolve_output_dir(cfg),
           cfg.record_trace);
  std::cout << pf::report_markdown(result.report);
  return 0;
}

int cmd_sweep(const SweepArgs& a) {
  auto cfg = load_run_config(a.run);
  pf::SweepSpec spec;
  for (const auto& r : split_list(a.rates)) spec.rates.push_back(std::stod(r));
  for (const auto& m : split_list(a.modes)) {
    auto mode = pf::parse_mode(m);
    if (!mode) throw pf::Error(pf::ErrorCode::kInvalidMode, m);
    spec.modes.push_back(*mode);
  }
  for (const auto& s : split_list(a.schedulers)) {
    auto sched = pf::parse_scheduler(s);
    if (!sched) throw pf::Error(pf::ErrorCode::kConfigParse, "scheduler " + s);
    spec.schedulers.push_back(*sched);
  }
  auto formats = parse_formats(a.run.formats);
  auto dir = pf::resolve_output_dir(cfg);
  auto results = pf::run_sweep(cfg, spec);
  for (const auto& r : results) {
    emit_all(r, formats, dir, cfg.record_trace);
    std::cout << r.report.name << " mean_ms=" << r.report.overall.mean_ms
              << " p95_ms=" << r.report.overall.p95_ms
              << " n=" << r.report.overall.count << "\n";
  }
  return 0;
}

int cmd_graph_build(const BuildArgs& a) {
  auto app = pf::app_from_name(a.app);
  auto profiles =
      a.profiles.empty() ? pf::default_profiles() : pf::load_profiles(a.profiles);
  auto tmpl = pf::build_app_template(app);
  pf::QueryConfig config = pf::default_app_config(app, "q0");
  if (!a.query_config.empty()) {
    config = pf::parse_config(pf::read_file(a.query_config));
    pf::finalize_config(app, config);
  }
  auto mode = pf::parse_mode(a.mode);
  if (!mode) throw pf::Error(pf::ErrorCode::kInvalidMode, a.mode);

  pf::TransformOptions opt;
  pf::PassSet passes = pf::parse_pass_list(a.passes);
  if (*mode == pf::ExecMode::kChain) {
    opt.wiring = pf::Wiring::kSequential;
    passes.clear();
  } else if (*mode == pf::ExecMode::kChainParallel) {
    opt.wiring = pf::Wiring::kComponentData;
    opt.prefix_cache = &profiles;
    passes.clear();
  }
  auto e = pf::optimize(pf::transform(tmpl, config, opt), profiles, passes);
  auto text = pf::serialize_egraph(e);
  if (a.output.empty()) {
    std::cout << text;
  } else {
    pf::write_file(a.output, text);
  }
  return 0;
}

int cmd_graph_diff(const DiffArgs& a) {
  pf::LabelMode mode = pf::LabelMode::kKindEngine;
  if (a.labels == "kind") {
    mode = pf::LabelMode::kKind;
  } else if (a.labels == "full") {
    mode = pf::LabelMode::kFull;
  } else if (a.labels != "kind-engine") {
    throw pf::Error(pf::ErrorCode::kConfigParse, "labels " + a.labels);
  }
  auto ga = pf::parse_egraph(pf::read_file(a.a));
  auto gb = pf::parse_egraph(pf::read_file(a.b));
  auto diff = pf::structural_diff(ga.graph, gb.graph, mode);
  if (diff.empty() && pf::isomorphic(ga.graph, gb.graph, mode)) {
    std::cout << "isomorphic\n";
    return 0;
  }
  for (const auto& line : diff) std::cout << line << "\n";
  if (diff.empty()) std::cout << "not isomorphic\n";
  return kExitDiffers;
}

int cmd_compare(const CompareArgs& a) {
  auto base = pf::parse_report_json(pf::read_file(a.baseline));
  auto cand = pf::parse_report_json(pf::read_file(a.candidate));
  auto rows = pf::compare_reports(base, cand);
  std::cout << pf::speedup_markdown(rows, base.name, cand.name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workflow orchestration simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto add_run_opts = [](CLI::App* sub, RunArgs& r) {
    sub->add_option("-c,--config", r.config, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--formats", r.formats, "csv,json,md");
    sub->add_option("--seed", r.seed, "override the experiment seed");
    sub->add_flag("--no-trace", r.no_trace, "skip the per-node trace file");
  };
  auto* run = app.add_subcommand("run", "run one experiment");
  add_run_opts(run, run_args);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "mode x scheduler x rate sweep");
  add_run_opts(sweep, sweep_args.run);
  sweep->add_option("--rates", sweep_args.rates, "comma-separated req/s");
  sweep->add_option("--modes", sweep_args.modes, "teola,chain,chain-parallel");
  sweep->add_option("--schedulers", sweep_args.schedulers,
                    "topo,blind-po,blind-to");

  auto* graph = app.add_subcommand("graph", "build or compare e-graphs");
  graph->require_subcommand(1);
  BuildArgs build_args;
  auto* build = graph->add_subcommand("build", "print the e-graph of an app");
  build->add_option("--app", build_args.app);
  build->add_option("--query-config", build_args.query_config);
  build->add_option("--profiles", build_args.profiles);
  build->add_option("--mode", build_args.mode);
  build->add_option("--passes", build_args.passes);
  build->add_option("-o,--output", build_args.output);
  DiffArgs diff_args;
  auto* diff = graph->add_subcommand("diff", "structural diff of two e-graphs");
  diff->add_option("a", diff_args.a)->required()->check(CLI::ExistingFile);
  diff->add_option("b", diff_args.b)->required()->check(CLI::ExistingFile);
  diff->add_option("--labels", diff_args.labels, "kind, kind-engine or full");

  auto* report = app.add_subcommand("report", "compare report files");
  report->require_subcommand(1);
  CompareArgs cmp_args;
  auto* compare = report->add_subcommand("compare", "speedup table A vs B");
  compare->add_option("baseline", cmp_args.baseline)
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("candidate", cmp_args.candidate)
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*build) return cmd_graph_build(build_args);
    if (*diff) return cmd_graph_diff(diff_args);
    if (*compare) return cmd_compare(cmp_args);
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitErrorBase + static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
