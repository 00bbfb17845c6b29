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


#include "primflow/engine/profile.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "primflow/core/error.h"
#include "primflow/core/serialize.h"

namespace primflow {

double interpolate(const std::vector<LatencyPoint>& table, double load) {
  if (table.empty()) throw Error(ErrorCode::kEmptyProfile, "empty table");
  if (table.size() == 1) return std::max(0.0, table.front().ms);
  std::size_t hi = 1;
  while (hi + 1 < table.size() && load > table[hi].load) ++hi;
  const auto& a = table[hi - 1];
  const auto& b = table[hi];
  double slope = (b.ms - a.ms) / (b.load - a.load);
  return std::max(0.0, a.ms + (load - a.load) * slope);
}

double latency(const EngineProfile& profile, double load) {
  if (profile.latency_table.empty()) {
    throw Error(ErrorCode::kEmptyProfile, profile.engine_id);
  }
  return interpolate(profile.latency_table, load);
}

std::int64_t max_efficient_batch(const EngineProfile& profile, double theta) {
  if (profile.latency_table.empty()) {
    throw Error(ErrorCode::kEmptyProfile, profile.engine_id);
  }
  auto throughput = [&](double l) {
    double ms = latency(profile, l);
    return ms > 0 ? l / ms : 0.0;
  };
  auto cur = static_cast<std::int64_t>(
      std::max(1.0, profile.latency_table.front().load));
  if (profile.max_slots > 0) cur = std::min(cur, profile.max_slots);
  while (true) {
    std::int64_t next = cur * 2;
    if (profile.max_slots > 0) next = std::min(next, profile.max_slots);
    if (next == cur) break;
    double gain = throughput(static_cast<double>(next)) /
                  throughput(static_cast<double>(cur));
    if (gain < 1.0 + theta) break;
    cur = next;
  }
  return cur;
}

double split_overhead(const EngineProfile& profile,
                      std::int64_t prefix_tokens) {
  if (!profile.epsilon_table.empty()) {
    return interpolate(profile.epsilon_table,
                       static_cast<double>(prefix_tokens));
  }
  return profile.epsilon;
}

void validate_profile(const EngineProfile& p) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kConfigParse, "profile " + p.engine_id + ": " + why);
  };
  if (p.engine_id.empty()) fail("missing engine_id");
  if (p.instances < 1) fail("instances must be >= 1");
  if (p.latency_table.empty()) fail("empty latency table");
  for (std::size_t i = 0; i < p.latency_table.size(); ++i) {
    if (p.latency_table[i].ms <= 0) fail("durations must be positive");
    if (i > 0 && p.latency_table[i].load <= p.latency_table[i - 1].load) {
      fail("latency table must be strictly increasing in load");
    }
  }
  if (p.max_slots < 1) fail("max_slots must be >= 1");
  if (p.epsilon < 1.0) fail("epsilon must be >= 1");
  for (const auto& pt : p.epsilon_table) {
    if (pt.ms < 1.0) fail("epsilon table values must be >= 1");
  }
  if (p.decode_ms_per_token < 0) fail("negative decode latency");
  if (p.max_decode_batch < 1) fail("max_decode_batch must be >= 1");
  if (p.prefix_cache_discount < 0 || p.prefix_cache_discount > 1) {
    fail("prefix_cache_discount must lie in [0, 1]");
  }
}

ProfileSet::ProfileSet(std::vector<EngineProfile> profiles) {
  for (auto& p : profiles) add(std::move(p));
}

void ProfileSet::add(EngineProfile profile) {
  validate_profile(profile);
  std::string id = profile.engine_id;
  by_id_[id] = std::move(profile);
}

const EngineProfile& ProfileSet::at(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kProfileMissing, "no profile for engine " + id);
  }
  return it->second;
}

EngineCatalog ProfileSet::catalog() const {
  EngineCatalog c;
  for (const auto& [id, p] : by_id_) c[id] = p.category;
  return c;
}

std::uint64_t ProfileSet::fingerprint() const {
  return fnv1a(serialize_profiles(*this));
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

using nlohmann::json;

json table_to_json(const std::vector<LatencyPoint>& t) {
  json a = json::array();
  for (const auto& p : t) a.push_back(json::array({p.load, p.ms}));
  return a;
}

std::vector<LatencyPoint> table_from_json(const json& j) {
  std::vector<LatencyPoint> t;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) {
      throw Error(ErrorCode::kConfigParse, "table rows must be [load, value]");
    }
    t.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return t;
}

}  // namespace

std::string serialize_profiles(const ProfileSet& set) {
  json engines = json::array();
  for (const auto& [id, p] : set.all()) {
    engines.push_back({{"engine_id", p.engine_id},
                       {"category", category_name(p.category)},
                       {"instances", p.instances},
                       {"latency_table", table_to_json(p.latency_table)},
                       {"max_slots", p.max_slots},
                       {"kv_slots", p.kv_slots},
                       {"epsilon", p.epsilon},
                       {"epsilon_table", table_to_json(p.epsilon_table)},
                       {"decode_ms_per_token", p.decode_ms_per_token},
                       {"max_decode_batch", p.max_decode_batch},
                       {"prefix_cache_discount", p.prefix_cache_discount},
                       {"blind_max_requests", p.blind_max_requests},
                       {"blind_timeout_ms", p.blind_timeout_ms}});
  }
  return json{{"engines", engines}}.dump(2) + "\n";
}

ProfileSet parse_profiles(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
  ProfileSet set;
  try {
    for (const auto& e : j.at("engines")) {
      EngineProfile p;
      p.engine_id = e.at("engine_id").get<std::string>();
      auto cat = parse_category(e.at("category").get<std::string>());
      if (!cat) {
        throw Error(ErrorCode::kConfigParse,
                    p.engine_id + ": unknown category");
      }
      p.category = *cat;
      p.instances = e.value("instances", 1);
      p.latency_table = table_from_json(e.at("latency_table"));
      p.max_slots = e.at("max_slots").get<std::int64_t>();
      p.kv_slots = e.value("kv_slots", std::int64_t{0});
      p.epsilon = e.value("epsilon", kDefaultEpsilon);
      if (e.contains("epsilon_table")) {
        p.epsilon_table = table_from_json(e.at("epsilon_table"));
      }
      p.decode_ms_per_token = e.value("decode_ms_per_token", 10.0);
      p.max_decode_batch = e.value("max_decode_batch", std::int64_t{64});
      p.prefix_cache_discount = e.value("prefix_cache_discount", 1.0);
      p.blind_max_requests = e.value("blind_max_requests", std::int64_t{0});
      p.blind_timeout_ms = e.value("blind_timeout_ms", 10.0);
      set.add(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigParse, e.what());
  }
  return set;
}

ProfileSet load_profiles(const std::string& path) {
  return parse_profiles(read_file(path));
}

}  // namespace primflow
