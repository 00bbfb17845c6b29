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


#ifndef PRIMFLOW_WORKLOADS_WORKLOAD_H_
#define PRIMFLOW_WORKLOADS_WORKLOAD_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/core/primitive.h"
#include "primflow/core/template.h"
#include "primflow/workloads/apps.h"

namespace primflow {

// Bounded integer distribution: constant, uniform[lo, hi] (inclusive) or a
// uniform choice among listed values.
struct Distribution {
  enum class Kind { kConstant, kUniform, kChoice };
  Kind kind = Kind::kConstant;
  std::int64_t value = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<std::int64_t> choices;

  static Distribution constant(std::int64_t v);
  static Distribution uniform(std::int64_t lo, std::int64_t hi);
  static Distribution choice(std::vector<std::int64_t> values);

  std::int64_t sample(std::mt19937_64& rng) const;
  std::int64_t min() const;
  std::int64_t max() const;

  bool operator==(const Distribution&) const = default;
};

struct WorkloadSpec {
  AppKind app = AppKind::kNaiveRagQa;
  double rate = 1.0;        // queries per second
  double duration_s = 10.0;
  std::uint64_t seed = 0;
  // 0 = unbounded; otherwise generation stops after this many queries.
  std::int64_t max_queries = 0;
  // "component.param" -> distribution, applied over the app defaults.
  std::map<std::string, Distribution> params;
  // Condition name -> distribution over {0, 1}.
  std::map<std::string, Distribution> conditions;

  bool operator==(const WorkloadSpec&) const = default;
};

struct QueryArrival {
  SimTime at = 0;
  AppKind app = AppKind::kNaiveRagQa;
  QueryConfig config;
};

// Bounded token-length and count ranges standing in for the datasets.
WorkloadSpec default_workload_spec(AppKind app, double rate,
                                   double duration_s, std::uint64_t seed);

// Throws ConfigParse on non-positive rate/duration or unbounded ranges.
void validate_workload_spec(const WorkloadSpec& spec);

// Exponential inter-arrivals at `rate`; configs sampled per query. A pure
// function of the spec.
std::vector<QueryArrival> generate_workload(const WorkloadSpec& spec);

// Merge ordered by (time, app id); stable within one stream.
std::vector<QueryArrival> colocate(
    const std::vector<std::vector<QueryArrival>>& streams);

std::string serialize_workload_spec(const WorkloadSpec& spec);
// Throws ConfigParse, UnknownApp.
WorkloadSpec parse_workload_spec(std::string_view text);

}  // namespace primflow

#endif  // PRIMFLOW_WORKLOADS_WORKLOAD_H_
