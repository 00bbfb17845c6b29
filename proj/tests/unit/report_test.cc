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

#include <filesystem>
#include <sstream>

#include "primflow/core/error.h"
#include "primflow/core/serialize.h"
#include "primflow/report/experiment.h"
#include "primflow/workloads/apps.h"
#include "scenarios.h"

namespace primflow {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small(AppKind app, double rate, double duration) {
  ExperimentConfig c;
  c.profiles = default_profiles();
  c.seed = 3;
  c.workloads = {default_workload_spec(app, rate, duration, 0)};
  return c;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("primflow_report_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(RunExperiment, TeolaBeatsChainOnAdvancedRag) {
  auto cfg = small(AppKind::kAdvancedRagQa, 1, 20);
  auto teola = run_experiment(cfg).report;
  cfg.mode = ExecMode::kChain;
  cfg.scheduler = SchedulerKind::kBlindTo;
  auto chain = run_experiment(cfg).report;
  ASSERT_EQ(teola.overall.count, chain.overall.count);
  EXPECT_LT(teola.overall.mean_ms, chain.overall.mean_ms);
}

TEST(RunExperiment, ChainModeIgnoresPasses) {
  auto cfg = small(AppKind::kNaiveRagQa, 2, 10);
  cfg.mode = ExecMode::kChain;
  cfg.scheduler = SchedulerKind::kBlindPo;
  cfg.passes = {};
  auto without = run_experiment(cfg);
  cfg.passes = all_passes();
  auto with = run_experiment(cfg);
  EXPECT_EQ(without.trace, with.trace);
  EXPECT_EQ(without.report.queries, with.report.queries);
}

TEST(RunExperiment, DeterministicForSeed) {
  auto cfg = small(AppKind::kSearchEngineGen, 2, 10);
  auto a = run_experiment(cfg);
  auto b = run_experiment(cfg);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.trace, b.trace);
}

TEST(RunExperiment, BreakdownSumsToLatency) {
  for (auto mode : {ExecMode::kTeola, ExecMode::kChain, ExecMode::kChainParallel}) {
    auto cfg = small(AppKind::kAdvancedRagQa, 2, 10);
    cfg.mode = mode;
    auto r = run_experiment(cfg);
    for (const auto& q : r.trace.queries) {
      EXPECT_LE(std::abs(q.breakdown.total() - q.latency()), 1) << q.query_id;
    }
    for (const auto& q : r.report.queries) {
      EXPECT_NEAR(q.breakdown.total(), q.latency_ms, 0.001);
    }
  }
}

TEST(RunExperiment, GraphBuildShareSmall) {
  for (auto app : kAllApps) {
    auto r = run_experiment(small(app, 1, 20)).report;
    ASSERT_EQ(r.apps.size(), 1u);
    const auto& a = r.apps[0];
    EXPECT_LT(a.mean_breakdown.graph_build, 0.05 * a.stats.mean_ms) << app_name(app);
    EXPECT_GT(a.mean_breakdown.graph_build, 0.0);
  }
}

TEST(RunExperiment, ColocatedAppsKeepIdentity) {
  ExperimentConfig cfg;
  cfg.profiles = default_profiles();
  cfg.workloads = {default_workload_spec(AppKind::kNaiveRagQa, 1, 10, 0),
                   default_workload_spec(AppKind::kAdvancedRagQa, 1, 10, 0)};
  auto r = run_experiment(cfg).report;
  ASSERT_EQ(r.apps.size(), 2u);
  EXPECT_NE(r.find_app("naive-rag"), nullptr);
  EXPECT_NE(r.find_app("advanced-rag"), nullptr);
  EXPECT_EQ(r.find_app("naive-rag")->stats.count + r.find_app("advanced-rag")->stats.count,
            r.overall.count);
}

TEST(EmitReport, CsvHasHeaderPlusOneRowPerQuery) {
  auto cfg = small(AppKind::kNaiveRagQa, 10, 10);
  cfg.workloads[0].max_queries = 100;
  auto r = run_experiment(cfg).report;
  ASSERT_EQ(r.queries.size(), 100u);
  auto dir = scratch("csv");
  std::string path = emit_report(r, ReportFormat::kCsv, dir.string());
  std::istringstream in(read_file(path));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 101);
}

TEST(EmitReport, JsonRoundTrips) {
  auto r = run_experiment(small(AppKind::kNaiveRagQa, 2, 10)).report;
  auto dir = scratch("json");
  std::string path = emit_report(r, ReportFormat::kJson, dir.string());
  Report back = parse_report_json(read_file(path));
  EXPECT_EQ(back.queries.size(), r.queries.size());
  EXPECT_EQ(report_json(back), report_json(r));
}

TEST(EmitReport, MarkdownAndTrace) {
  auto res = run_experiment(small(AppKind::kNaiveRagQa, 2, 5));
  auto dir = scratch("md");
  std::string md = read_file(emit_report(res.report, ReportFormat::kMarkdown, dir.string()));
  EXPECT_NE(md.find("| app"), std::string::npos);
  std::string trace = read_file(emit_trace(res.report, res.trace, dir.string()));
  std::istringstream in(trace);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_GE(lines, res.trace.records.size());
}

TEST(EmitReport, UnwritableDirectoryIsIoFailure) {
  auto r = run_experiment(small(AppKind::kNaiveRagQa, 2, 5)).report;
  auto dir = scratch("io");
  std::string blocker = (dir / "file").string();
  write_file(blocker, "x");
  try {
    emit_report(r, ReportFormat::kCsv, blocker + "/sub");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
}

TEST(CompareReports, RatioIsBaselineOverCandidate) {
  Report base, cand;
  base.apps = {{"naive-rag", 2.0, {}, {}}, {"advanced-rag", 2.0, {}, {}}};
  base.apps[0].stats.mean_ms = 300;
  base.apps[1].stats.mean_ms = 500;
  cand.apps = base.apps;
  cand.apps[0].stats.mean_ms = 200;
  cand.apps[1].stats.mean_ms = 400;
  auto rows = compare_reports(base, cand);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_DOUBLE_EQ(row.speedup, row.baseline_mean_ms / row.candidate_mean_ms);
  }
  std::string md = speedup_markdown(rows, "chain", "teola");
  EXPECT_NE(md.find("1.50"), std::string::npos);
  EXPECT_NE(md.find("1.25"), std::string::npos);
}

TEST(ExperimentConfigFile, ParsesAndRejects) {
  auto cfg = load_experiment_config(testing::config_path("experiments/quick.json"));
  EXPECT_FALSE(cfg.workloads.empty());
  try {
    parse_experiment_config("{");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigParse);
  }
  try {
    parse_experiment_config(R"({"workloads":[{"app":"nope","rate":1,"duration_s":1}]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownApp);
  }
  try {
    parse_experiment_config(
        R"({"profiles":"missing.json","workloads":[{"app":"naive-rag","rate":1,"duration_s":1}]})",
        "/nonexistent");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
  EXPECT_THROW(parse_experiment_config(R"({"mode":"fast","workloads":[]})"), Error);
}

TEST(ExperimentConfigFile, OutputDirEnvOverride) {
  ExperimentConfig cfg;
  cfg.output_dir = "from-config";
  ::setenv("TEOLA_SIM_OUTPUT_DIR", "/tmp/override", 1);
  EXPECT_EQ(resolve_output_dir(cfg), "/tmp/override");
  ::unsetenv("TEOLA_SIM_OUTPUT_DIR");
  EXPECT_EQ(resolve_output_dir(cfg), "from-config");
}

TEST(Sweep, OneResultPerCombination) {
  auto cfg = small(AppKind::kNaiveRagQa, 1, 5);
  SweepSpec s;
  s.rates = {1, 2};
  s.modes = {ExecMode::kTeola, ExecMode::kChain};
  s.schedulers = {SchedulerKind::kTopo};
  auto results = run_sweep(cfg, s);
  ASSERT_EQ(results.size(), 4u);
  // Concurrent sweep runs match sequential ones.
  auto single = cfg;
  single.workloads[0].rate = 2;
  single.mode = ExecMode::kChain;
  auto seq = run_experiment(single).report;
  bool found = false;
  for (const auto& r : results) {
    if (r.report.mode == "chain" && !r.report.apps.empty() &&
        r.report.apps[0].rate == 2) {
      EXPECT_EQ(r.report.queries, seq.queries);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace primflow
