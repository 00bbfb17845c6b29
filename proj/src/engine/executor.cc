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


#include "primflow/engine/executor.h"

#include <algorithm>
#include <cmath>

#include "primflow/core/error.h"

namespace primflow {

SimTime ms_to_sim(double ms) {
  return static_cast<SimTime>(std::llround(ms * kMicrosPerMilli));
}

std::int64_t Batch::request_count() const {
  std::int64_t n = 0;
  for (const auto& r : requests) n += r.count;
  return n;
}

std::int64_t Batch::load() const {
  std::int64_t n = 0;
  for (const auto& r : requests) {
    n += is_prefill_like(r.kind) ? r.count * r.load_per_request : r.count;
  }
  return n;
}

BatchResult plan_batch(const EngineProfile& profile, const Batch& batch,
                       SimTime now) {
  if (batch.empty() || batch.request_count() == 0) {
    throw Error(ErrorCode::kEmptyBatch, "engine " + profile.engine_id);
  }
  const PrimitiveKind phase = batch.requests.front().kind;
  const bool decode = is_decode_like(phase);
  const bool prefill = is_prefill_like(phase);
  for (const auto& r : batch.requests) {
    if (is_decode_like(r.kind) != decode || is_prefill_like(r.kind) != prefill) {
      throw Error(ErrorCode::kInternal, "mixed-phase batch on " +
                                            profile.engine_id);
    }
    if (!kind_runs_on(r.kind, profile.category)) {
      throw Error(ErrorCode::kInternal, std::string(kind_name(r.kind)) +
                                            " cannot run on " +
                                            profile.engine_id);
    }
  }

  BatchResult result;
  result.start = now;
  if (decode) {
    if (batch.request_count() > profile.max_decode_batch) {
      throw Error(ErrorCode::kCapacityExceeded,
                  profile.engine_id + ": decode batch of " +
                      std::to_string(batch.request_count()) + " sequences");
    }
    // Constant per-token step; each segment boundary is observable.
    SimTime end = now;
    for (std::size_t i = 0; i < batch.requests.size(); ++i) {
      const auto& segs = batch.requests[i].segments;
      std::int64_t cum = 0;
      for (std::size_t s = 0; s < segs.size(); ++s) {
        cum += segs[s];
        SimTime at = now + ms_to_sim(static_cast<double>(cum) *
                                     profile.decode_ms_per_token);
        result.events.push_back(
            {at, i, static_cast<int>(s), s + 1 == segs.size()});
        end = std::max(end, at);
      }
      if (segs.empty()) result.events.push_back({now, i, 0, true});
    }
    result.end = end;
  } else {
    std::int64_t load = batch.load();
    if (load > profile.max_slots) {
      throw Error(ErrorCode::kCapacityExceeded,
                  profile.engine_id + ": load " + std::to_string(load) +
                      " > " + std::to_string(profile.max_slots));
    }
    double ms = latency(profile, static_cast<double>(load));
    if (prefill) {
      for (const auto& r : batch.requests) {
        if (r.kind != PrimitiveKind::kFullPrefilling) continue;
        double eps = split_overhead(profile, r.prefix_tokens);
        ms += static_cast<double>(r.count) * (eps - 1.0) *
              latency(profile, static_cast<double>(r.load_per_request));
      }
    }
    result.end = now + ms_to_sim(ms);
    for (std::size_t i = 0; i < batch.requests.size(); ++i) {
      result.events.push_back({result.end, i, 0, true});
    }
  }
  std::stable_sort(result.events.begin(), result.events.end(),
                   [](const CompletionEvent& a, const CompletionEvent& b) {
                     return a.at < b.at;
                   });
  return result;
}

BatchResult execute_batch(EngineInstance& instance,
                          const EngineProfile& profile, const Batch& batch,
                          SimTime now) {
  if (instance.busy && instance.busy_until > now) {
    throw Error(ErrorCode::kInternal,
                profile.engine_id + "/" + std::to_string(instance.instance_id) +
                    " is busy");
  }
  BatchResult r = plan_batch(profile, batch, now);
  instance.busy = true;
  instance.busy_until = r.end;
  instance.executed_requests += batch.request_count();
  if (profile.is_llm() && is_prefill_like(batch.requests.front().kind)) {
    instance.kv_occupied += batch.load();
  }
  return r;
}

void release_instance(EngineInstance& instance) { instance.busy = false; }

std::optional<int> select_instance(const std::vector<EngineInstance>& instances,
                                   const EngineProfile& profile) {
  std::optional<int> best;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (inst.busy) continue;
    if (!best) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& b = instances[static_cast<std::size_t>(*best)];
    auto metric = [&](const EngineInstance& x) {
      return profile.is_llm() ? x.kv_occupied : x.executed_requests;
    };
    if (metric(inst) < metric(b) ||
        (metric(inst) == metric(b) && inst.instance_id < b.instance_id)) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace primflow
