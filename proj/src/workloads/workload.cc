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


#include "primflow/workloads/workload.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "primflow/core/error.h"

namespace primflow {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json dist_to_json(const Distribution& d) {
  switch (d.kind) {
    case Distribution::Kind::kConstant: return d.value;
    case Distribution::Kind::kUniform: return json{{"uniform", {d.lo, d.hi}}};
    case Distribution::Kind::kChoice: return json{{"choice", d.choices}};
  }
  return nullptr;
}

Distribution dist_from_json(const json& j) {
  if (j.is_number_integer()) return Distribution::constant(j.get<std::int64_t>());
  if (j.is_object() && j.size() == 1) {
    if (j.contains("constant")) {
      return Distribution::constant(j.at("constant").get<std::int64_t>());
    }
    if (j.contains("uniform")) {
      auto r = j.at("uniform").get<std::vector<std::int64_t>>();
      if (r.size() == 2) return Distribution::uniform(r[0], r[1]);
    }
    if (j.contains("choice")) {
      return Distribution::choice(
          j.at("choice").get<std::vector<std::int64_t>>());
    }
  }
  throw Error(ErrorCode::kConfigParse, "bad distribution: " + j.dump());
}

void apply(QueryConfig& cfg, const std::string& dotted, std::int64_t v) {
  auto dot = dotted.find('.');
  if (dot == std::string::npos) {
    throw Error(ErrorCode::kConfigParse,
                "parameter '" + dotted + "' is not component.param");
  }
  cfg.components[dotted.substr(0, dot)].params[dotted.substr(dot + 1)] = v;
}

}  // namespace

Distribution Distribution::constant(std::int64_t v) {
  Distribution d;
  d.value = v;
  return d;
}

Distribution Distribution::uniform(std::int64_t lo, std::int64_t hi) {
  Distribution d;
  d.kind = Kind::kUniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Distribution Distribution::choice(std::vector<std::int64_t> values) {
  Distribution d;
  d.kind = Kind::kChoice;
  d.choices = std::move(values);
  return d;
}

std::int64_t Distribution::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::kConstant: return value;
    case Kind::kUniform:
      return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    case Kind::kChoice: {
      std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
      return choices[pick(rng)];
    }
  }
  return value;
}

std::int64_t Distribution::min() const {
  switch (kind) {
    case Kind::kConstant: return value;
    case Kind::kUniform: return lo;
    case Kind::kChoice: return *std::min_element(choices.begin(), choices.end());
  }
  return value;
}

std::int64_t Distribution::max() const {
  switch (kind) {
    case Kind::kConstant: return value;
    case Kind::kUniform: return hi;
    case Kind::kChoice: return *std::max_element(choices.begin(), choices.end());
  }
  return value;
}

WorkloadSpec default_workload_spec(AppKind app, double rate,
                                   double duration_s, std::uint64_t seed) {
  WorkloadSpec s;
  s.app = app;
  s.rate = rate;
  s.duration_s = duration_s;
  s.seed = seed;
  auto u = Distribution::uniform;
  switch (app) {
    case AppKind::kSearchEngineGen:
      s.params = {{"proxy.question_tokens", u(16, 48)},
                  {"proxy.answer_tokens", u(16, 48)},
                  {"synthesize.question_tokens", u(16, 48)},
                  {"synthesize.answer_tokens", u(64, 128)}};
      s.conditions = {{"needs_search", Distribution::choice({0, 1, 1, 1})}};
      break;
    case AppKind::kLlmAgent:
      s.params = {{"planner.question_tokens", u(16, 48)},
                  {"planner.expansion_count", u(2, 4)},
                  {"responder.answer_tokens", u(64, 128)}};
      break;
    case AppKind::kNaiveRagQa:
      s.params = {{"indexing.chunk_count", u(48, 128)},
                  {"synthesize.question_tokens", u(16, 48)},
                  {"synthesize.answer_tokens", u(32, 96)}};
      break;
    case AppKind::kAdvancedRagQa:
      s.params = {{"indexing.chunk_count", u(48, 128)},
                  {"query_expansion.question_tokens", u(16, 48)},
                  {"synthesize.question_tokens", u(16, 48)},
                  {"synthesize.answer_tokens", u(32, 96)}};
      break;
    case AppKind::kContextualRetrieval:
      s.params = {{"contextualize.chunk_count", u(24, 48)},
                  {"synthesize.question_tokens", u(16, 48)},
                  {"synthesize.answer_tokens", u(32, 96)}};
      break;
  }
  return s;
}

void validate_workload_spec(const WorkloadSpec& spec) {
  auto fail = [](const std::string& why) {
    throw Error(ErrorCode::kConfigParse, "workload: " + why);
  };
  if (!(spec.rate > 0) || !std::isfinite(spec.rate)) fail("rate must be > 0");
  if (!(spec.duration_s > 0) || !std::isfinite(spec.duration_s)) {
    fail("duration must be > 0");
  }
  if (spec.max_queries < 0) fail("max_queries must be >= 0");
  auto check = [&](const std::string& name, const Distribution& d) {
    if (d.kind == Distribution::Kind::kUniform && d.lo > d.hi) {
      fail(name + ": empty uniform range");
    }
    if (d.kind == Distribution::Kind::kChoice && d.choices.empty()) {
      fail(name + ": empty choice");
    }
    if (d.min() < 0) fail(name + ": negative values");
  };
  for (const auto& [k, d] : spec.params) check(k, d);
  for (const auto& [k, d] : spec.conditions) {
    check(k, d);
    if (d.max() > 1) fail(k + ": condition values must be 0 or 1");
  }
}

std::vector<QueryArrival> generate_workload(const WorkloadSpec& spec) {
  validate_workload_spec(spec);
  std::mt19937_64 arrivals(splitmix64(spec.seed));
  std::mt19937_64 params(splitmix64(spec.seed ^ 0x5851f42d4c957f2dULL));
  std::exponential_distribution<double> gap(spec.rate);
  const std::string app(app_name(spec.app));

  std::vector<QueryArrival> out;
  double t = 0;
  while (true) {
    t += gap(arrivals);
    if (t >= spec.duration_s) break;
    if (spec.max_queries > 0 &&
        static_cast<std::int64_t>(out.size()) >= spec.max_queries) {
      break;
    }
    char id[32];
    std::snprintf(id, sizeof id, "%06zu", out.size());
    QueryArrival q;
    q.at = std::llround(t * 1e6);
    q.app = spec.app;
    q.config = default_app_config(spec.app, app + "/" + id);
    for (const auto& [name, d] : spec.params) apply(q.config, name, d.sample(params));
    for (const auto& [name, d] : spec.conditions) {
      q.config.conditions[name] = d.sample(params) != 0;
    }
    finalize_config(spec.app, q.config);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<QueryArrival> colocate(
    const std::vector<std::vector<QueryArrival>>& streams) {
  std::vector<QueryArrival> out;
  for (const auto& s : streams) out.insert(out.end(), s.begin(), s.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const QueryArrival& a, const QueryArrival& b) {
                     if (a.at != b.at) return a.at < b.at;
                     return a.config.app_id < b.config.app_id;
                   });
  return out;
}

std::string serialize_workload_spec(const WorkloadSpec& spec) {
  json params = json::object();
  for (const auto& [k, d] : spec.params) params[k] = dist_to_json(d);
  json conds = json::object();
  for (const auto& [k, d] : spec.conditions) conds[k] = dist_to_json(d);
  json j{{"app", app_name(spec.app)},
         {"rate", spec.rate},
         {"duration_s", spec.duration_s},
         {"seed", spec.seed},
         {"max_queries", spec.max_queries},
         {"params", params},
         {"conditions", conds}};
  return j.dump(2) + "\n";
}

WorkloadSpec parse_workload_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
  try {
    WorkloadSpec s;
    s.app = app_from_name(j.at("app").get<std::string>());
    s.rate = j.value("rate", 1.0);
    s.duration_s = j.value("duration_s", 10.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.max_queries = j.value("max_queries", std::int64_t{0});
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) {
        s.params[k] = dist_from_json(v);
      }
    }
    if (j.contains("conditions")) {
      for (const auto& [k, v] : j.at("conditions").items()) {
        s.conditions[k] = dist_from_json(v);
      }
    }
    validate_workload_spec(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
}

}  // namespace primflow
