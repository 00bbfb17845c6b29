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
#include <random>

#include "primflow/core/error.h"
#include "primflow/core/graph.h"
#include "primflow/core/serialize.h"
#include "primflow/core/template.h"
#include "primflow/workloads/apps.h"
#include "scenarios.h"

namespace primflow {
namespace {

using testing::make_node;

PGraph chain_graph(std::vector<std::string> ids) {
  PGraph g;
  for (const auto& id : ids) {
    g.add_node(make_node(id, PrimitiveKind::kEmbedding, "embedding", {}, {}));
  }
  for (std::size_t i = 1; i < ids.size(); ++i) {
    g.add_edge({ids[i - 1], ids[i], ""});
  }
  return g;
}

PGraph from_edges(const std::vector<std::string>& ids,
                  const std::vector<std::pair<std::string, std::string>>& es) {
  PGraph g;
  for (const auto& id : ids) {
    g.add_node(make_node(id, PrimitiveKind::kEmbedding, "embedding", {}, {}));
  }
  for (const auto& [a, b] : es) g.add_edge({a, b, ""});
  return g;
}

TEST(TopoSort, Singleton) {
  EXPECT_EQ(topo_sort(chain_graph({"x"})), std::vector<std::string>{"x"});
}

TEST(TopoSort, Chain) {
  EXPECT_EQ(topo_sort(chain_graph({"a", "b", "c"})),
            (std::vector<std::string>{"a", "b", "c"}));
}

// Enumerate every linear extension of the diamond; the tie-break must pick
// the lexicographically smallest.
TEST(TopoSort, DiamondTieBreak) {
  PGraph g = from_edges({"a", "b", "c", "d"},
                        {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}});
  std::vector<std::string> ids = {"a", "b", "c", "d"};
  std::vector<std::vector<std::string>> valid;
  do {
    auto pos = [&](const std::string& n) {
      return std::find(ids.begin(), ids.end(), n) - ids.begin();
    };
    bool ok = true;
    for (const auto& e : g.edges()) ok &= pos(e.from) < pos(e.to);
    if (ok) valid.push_back(ids);
  } while (std::next_permutation(ids.begin(), ids.end()));
  ASSERT_EQ(valid.size(), 2u);
  EXPECT_EQ(topo_sort(g), *std::min_element(valid.begin(), valid.end()));
  EXPECT_EQ(topo_sort(g), (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(TopoSort, CycleThrows) {
  PGraph g = from_edges({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  try {
    topo_sort(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCyclicGraph);
  }
}

TEST(TopoSort, RandomDagsRespectEdges) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    int n = std::uniform_int_distribution<int>(1, 10)(rng);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::pair<std::string, std::string>> es;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::bernoulli_distribution(0.3)(rng)) es.push_back({ids[i], ids[j]});
      }
    }
    PGraph g = from_edges(ids, es);
    auto order = topo_sort(g);
    auto sorted_order = order;
    std::sort(sorted_order.begin(), sorted_order.end());
    auto sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    ASSERT_EQ(sorted_order, sorted_ids);
    for (const auto& e : g.edges()) {
      auto a = std::find(order.begin(), order.end(), e.from);
      auto b = std::find(order.begin(), order.end(), e.to);
      EXPECT_LT(a, b);
    }
  }
}

TEST(AssignDepths, Singleton) {
  auto d = assign_depths(chain_graph({"x"}));
  EXPECT_EQ(d, (std::map<std::string, int>{{"x", 0}}));
}

TEST(AssignDepths, Chain) {
  auto d = assign_depths(chain_graph({"a", "b", "c"}));
  EXPECT_EQ(d, (std::map<std::string, int>{{"a", 2}, {"b", 1}, {"c", 0}}));
}

TEST(AssignDepths, FirstQueryOfTwoQueryExample) {
  PGraph g = from_edges(
      {"A", "B", "C", "D", "E", "F"},
      {{"A", "C"}, {"B", "E"}, {"C", "E"}, {"D", "E"}, {"E", "F"}});
  auto d = assign_depths(g);
  std::map<std::string, int> expected = {{"F", 0}, {"E", 1}, {"C", 2},
                                         {"D", 2}, {"B", 2}, {"A", 3}};
  EXPECT_EQ(d, expected);
  EXPECT_GT(d["A"], d["B"]);
}

TEST(AssignDepths, IdempotentAndRelabelInvariant) {
  PGraph g = from_edges({"p", "q", "r", "s"},
                        {{"p", "q"}, {"q", "s"}, {"r", "s"}});
  auto d1 = assign_depths(g);
  EXPECT_EQ(d1, assign_depths(g));
  std::map<std::string, std::string> rename = {
      {"p", "z1"}, {"q", "a9"}, {"r", "m"}, {"s", "b"}};
  std::vector<std::string> ids;
  std::vector<std::pair<std::string, std::string>> es;
  for (const auto& [k, v] : rename) ids.push_back(v);
  for (const auto& e : g.edges()) es.push_back({rename[e.from], rename[e.to]});
  auto d2 = assign_depths(from_edges(ids, es));
  for (const auto& [k, v] : rename) EXPECT_EQ(d1[k], d2[v]);
}

TEST(AssignDepths, CycleThrows) {
  PGraph g = from_edges({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  EXPECT_THROW(assign_depths(g), Error);
}

TEST(GraphIr, RoundTripIsByteIdentical) {
  auto s = testing::two_query_scenario();
  std::string text = serialize_egraph(s.q1);
  EGraph back = parse_egraph(text);
  EXPECT_EQ(back, s.q1);
  EXPECT_EQ(serialize_egraph(back), text);
  std::string ptext = serialize_pgraph(s.q2.graph);
  EXPECT_EQ(serialize_pgraph(parse_pgraph(ptext)), ptext);
}

TEST(GraphIr, MalformedTextIsConfigParse) {
  try {
    parse_pgraph("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigParse);
  }
}

TEST(GraphIr, ValidateEgraphRejectsNonDecreasingDepth) {
  auto s = testing::two_query_scenario();
  EXPECT_NO_THROW(validate_egraph(s.q1));
  EGraph bad = s.q1;
  bad.depth["C"] = bad.depth["A"];
  EXPECT_THROW(validate_egraph(bad), Error);
}

Component simple(const std::string& name, const std::string& engine,
                 std::vector<std::string> in, std::vector<std::string> out) {
  Component c;
  c.name = name;
  c.role = RoleKind::kQueryEmbedding;
  c.engine_id = engine;
  c.in_kwargs = std::move(in);
  c.out_kwargs = std::move(out);
  return c;
}

TEST(ValidateTemplate, CycleReportedOnce) {
  WorkflowTemplate t;
  t.id = "cyc";
  t.inputs = {"x"};
  t.components = {simple("A", "embedding", {"x"}, {"a"}),
                  simple("B", "embedding", {"a"}, {"b"})};
  t.edges = {{"A", "B"}, {"B", "A"}};
  auto r = validate_template(t, default_profiles().catalog());
  EXPECT_EQ(r.count(ViolationKind::kCycle), 1u);
}

TEST(ValidateTemplate, NaiveRagIsClean) {
  auto r = validate_template(build_app_template(AppKind::kNaiveRagQa),
                             default_profiles().catalog());
  EXPECT_TRUE(r.ok());
}

TEST(ValidateTemplate, UnknownEngine) {
  WorkflowTemplate t;
  t.id = "unk";
  t.inputs = {"x"};
  t.components = {simple("A", "gpu-x", {"x"}, {"a"})};
  auto r = validate_template(t, default_profiles().catalog());
  EXPECT_EQ(r.count(ViolationKind::kUnknownEngine), 1u);
}

TEST(ValidateTemplate, CollectsSeveralViolations) {
  WorkflowTemplate t;
  t.id = "many";
  t.inputs = {"x"};
  t.components = {simple("A", "gpu-x", {"nope"}, {"a"}),
                  simple("A", "embedding", {}, {"b"})};
  t.edges = {{"A", "ghost"}};
  auto r = validate_template(t, default_profiles().catalog());
  EXPECT_GE(r.violations.size(), 4u);
  EXPECT_EQ(r.count(ViolationKind::kDuplicateComponent), 1u);
  EXPECT_EQ(r.count(ViolationKind::kDanglingEdge), 1u);
  EXPECT_EQ(r.count(ViolationKind::kUnproducedInput), 1u);
  EXPECT_EQ(r.count(ViolationKind::kMissingKwargs), 1u);
}

TEST(Templates, RoundTrip) {
  for (auto app : kAllApps) {
    auto t = build_app_template(app);
    std::string text = serialize_template(t);
    EXPECT_EQ(parse_template(text), t);
    auto c = default_app_config(app, "q");
    EXPECT_EQ(parse_config(serialize_config(c)), c);
  }
}

}  // namespace
}  // namespace primflow
