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

#include <cmath>
#include <random>

#include "primflow/core/isomorphism.h"
#include "primflow/core/serialize.h"
#include "primflow/optimizer/optimizer.h"
#include "primflow/report/experiment.h"
#include "primflow/runtime/simulator.h"
#include "primflow/workloads/apps.h"
#include "primflow/workloads/workload.h"
#include "scenarios.h"

namespace primflow {
namespace {

constexpr int kFuzzCases = 1000;

struct Corpus {
  std::vector<testing::FuzzCase> cases;
  std::vector<PGraph> pgraphs;
  std::vector<EGraph> egraphs;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    std::mt19937_64 rng(20261015);
    ProfileSet prof = testing::fuzz_profiles();
    for (int i = 0; i < kFuzzCases; ++i) {
      auto fc = testing::fuzz_case(rng, i);
      PGraph p = transform(fc.tmpl, fc.config);
      out.egraphs.push_back(optimize(p, prof, all_passes()));
      out.pgraphs.push_back(std::move(p));
      out.cases.push_back(std::move(fc));
    }
    for (auto app : kAllApps) {
      PGraph p = transform(build_app_template(app), default_app_config(app, "b"));
      out.egraphs.push_back(optimize(p, prof, all_passes()));
      out.egraphs.push_back(optimize(p, prof, {}));
    }
    return out;
  }();
  return c;
}

void check_depths(const EGraph& e) {
  ASSERT_NO_THROW(validate_egraph(e));
  EXPECT_EQ(e.depth, assign_depths(e.graph));
  for (const auto& ed : e.graph.edges()) {
    EXPECT_GT(e.depth.at(ed.from), e.depth.at(ed.to));
  }
  for (const auto& s : e.graph.sinks()) EXPECT_EQ(e.depth.at(s), 0);
}

TEST(Properties, FuzzTemplatesAreValid) {
  auto catalog = testing::fuzz_profiles().catalog();
  for (const auto& fc : corpus().cases) {
    auto r = validate_template(fc.tmpl, catalog);
    ASSERT_TRUE(r.ok()) << fc.tmpl.id << ": "
                        << (r.violations.empty() ? "" : r.violations[0].detail);
  }
}

TEST(Properties, GraphIrRoundTrip) {
  for (const auto& e : corpus().egraphs) {
    std::string text = serialize_egraph(e);
    EGraph back = parse_egraph(text);
    ASSERT_EQ(back, e);
    ASSERT_EQ(serialize_egraph(back), text);
  }
  for (const auto& p : corpus().pgraphs) {
    std::string text = serialize_pgraph(p);
    ASSERT_EQ(serialize_pgraph(parse_pgraph(text)), text);
  }
  for (const auto& fc : corpus().cases) {
    ASSERT_EQ(parse_template(serialize_template(fc.tmpl)), fc.tmpl);
    ASSERT_EQ(parse_config(serialize_config(fc.config)), fc.config);
  }
}

TEST(Properties, PassIdempotence) {
  ProfileSet prof = testing::fuzz_profiles();
  for (std::size_t i = 0; i < corpus().pgraphs.size(); ++i) {
    PGraph g = corpus().pgraphs[i];
    for (PassId pass : kPassOrder) {
      PGraph once = run_pass(pass, g, prof);
      PGraph twice = run_pass(pass, once, prof);
      ASSERT_TRUE(isomorphic(once, twice, LabelMode::kFull))
          << corpus().cases[i].tmpl.id << " " << pass_name(pass);
      g = std::move(once);
    }
  }
}

TEST(Properties, SemanticsPreserved) {
  for (std::size_t i = 0; i < corpus().pgraphs.size(); ++i) {
    ASSERT_TRUE(semantic_violations(corpus().pgraphs[i]).empty())
        << corpus().cases[i].tmpl.id;
    auto v = semantic_violations(corpus().egraphs[i].graph);
    ASSERT_TRUE(v.empty()) << corpus().cases[i].tmpl.id << ": " << v.front();
  }
}

TEST(Properties, DepthEdgeInvariant) {
  for (const auto& e : corpus().egraphs) check_depths(e);
}

TEST(Properties, SlotDisciplineAndLiveness) {
  ProfileSet prof = testing::fuzz_profiles();
  for (auto sched : {SchedulerKind::kTopo, SchedulerKind::kBlindPo,
                     SchedulerKind::kBlindTo}) {
    SimOptions opts;
    opts.scheduler = sched;
    Simulator sim(prof, opts);
    std::size_t submitted = 0;
    for (std::size_t i = 0; i < corpus().cases.size(); i += 4) {
      sim.submit({corpus().egraphs[i], static_cast<SimTime>(i) * 5000, 0});
      ++submitted;
    }
    Trace t = sim.run();
    ASSERT_EQ(t.queries.size(), submitted);
    for (const auto& q : t.queries) EXPECT_GE(q.finish, q.submit);
    ASSERT_FALSE(t.batches.empty());
    for (const auto& b : t.batches) {
      ASSERT_GT(b.requests, 0);
      ASSERT_LE(b.load, b.capacity) << b.engine << " batch " << b.id;
      ASSERT_LE(b.load, b.phase == Phase::kDecode
                            ? prof.at(b.engine).max_decode_batch
                            : prof.at(b.engine).max_slots);
    }
  }
}

TEST(Properties, SimulatorDeterminism) {
  ExperimentConfig cfg;
  cfg.profiles = default_profiles();
  cfg.seed = 9;
  cfg.workloads = {default_workload_spec(AppKind::kNaiveRagQa, 3, 20, 0),
                   default_workload_spec(AppKind::kAdvancedRagQa, 3, 20, 0)};
  for (auto sched : {SchedulerKind::kTopo, SchedulerKind::kBlindTo}) {
    cfg.scheduler = sched;
    auto a = run_experiment(cfg);
    auto b = run_experiment(cfg);
    ASSERT_EQ(a.trace, b.trace);
    ASSERT_EQ(a.report, b.report);
    ASSERT_FALSE(a.trace.records.empty());
  }
}

TEST(Properties, PoissonCountWithinThreeSigma) {
  for (double rate : {1.0, 4.0, 25.0}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const double duration = 400.0 / rate;
      auto q = generate_workload(
          default_workload_spec(AppKind::kNaiveRagQa, rate, duration, seed));
      double mean = rate * duration;
      EXPECT_LE(std::abs(static_cast<double>(q.size()) - mean),
                3 * std::sqrt(mean))
          << "rate " << rate << " seed " << seed << " count " << q.size();
    }
  }
}

}  // namespace
}  // namespace primflow
