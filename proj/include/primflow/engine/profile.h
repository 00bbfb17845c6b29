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


#ifndef PRIMFLOW_ENGINE_PROFILE_H_
#define PRIMFLOW_ENGINE_PROFILE_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/core/graph.h"
#include "primflow/core/primitive.h"

namespace primflow {

struct LatencyPoint {
  double load = 0;
  double ms = 0;

  bool operator==(const LatencyPoint&) const = default;
};

inline constexpr double kDefaultTheta = 0.05;
inline constexpr double kDefaultEpsilon = 1.08;

struct EngineProfile {
  std::string engine_id;
  EngineCategory category = EngineCategory::kEmbedding;
  int instances = 1;
  // Load is total prompt tokens for LLM prefill, items otherwise.
  std::vector<LatencyPoint> latency_table;
  // Per-batch capacity: tokens for LLM prefill, items otherwise.
  std::int64_t max_slots = 0;
  std::int64_t kv_slots = 0;
  // Continuation overhead of a FullPrefilling that follows a partial one.
  // When the table is non-empty it is indexed by prefix tokens and wins.
  double epsilon = kDefaultEpsilon;
  std::vector<LatencyPoint> epsilon_table;
  double decode_ms_per_token = 10.0;
  // Sequences per decode batch.
  std::int64_t max_decode_batch = 64;
  // Fraction of declared cached-prefix tokens skipped by a prefix cache.
  double prefix_cache_discount = 1.0;
  // Blind batching knobs: request cap (0 = load cap only) and timeout.
  std::int64_t blind_max_requests = 0;
  double blind_timeout_ms = 10.0;

  bool is_llm() const { return category == EngineCategory::kLlm; }

  bool operator==(const EngineProfile&) const = default;
};

// Piecewise-linear in the table, extrapolated linearly past both ends and
// floored at 0. A one-point table is flat. Throws EmptyProfile.
double interpolate(const std::vector<LatencyPoint>& table, double load);

double latency(const EngineProfile& profile, double load);

// Doubles the load from the smallest breakpoint while the throughput gain of
// a doubling stays at or above 1 + theta; capped at max_slots.
std::int64_t max_efficient_batch(const EngineProfile& profile,
                                 double theta = kDefaultTheta);

double split_overhead(const EngineProfile& profile, std::int64_t prefix_tokens);

// Throws ConfigParse on any violated profile invariant.
void validate_profile(const EngineProfile& profile);

class ProfileSet {
 public:
  ProfileSet() = default;
  explicit ProfileSet(std::vector<EngineProfile> profiles);

  void add(EngineProfile profile);
  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
  // Throws ProfileMissing.
  const EngineProfile& at(const std::string& id) const;
  const std::map<std::string, EngineProfile>& all() const { return by_id_; }
  EngineCatalog catalog() const;
  // Stable hash of the canonical serialization.
  std::uint64_t fingerprint() const;

 private:
  std::map<std::string, EngineProfile> by_id_;
};

std::string serialize_profiles(const ProfileSet& set);
ProfileSet parse_profiles(std::string_view text);
ProfileSet load_profiles(const std::string& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data,
                    std::uint64_t seed = 1469598103934665603ULL);

}  // namespace primflow

#endif  // PRIMFLOW_ENGINE_PROFILE_H_
