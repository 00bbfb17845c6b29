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


#ifndef PRIMFLOW_ENGINE_EXECUTOR_H_
#define PRIMFLOW_ENGINE_EXECUTOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "primflow/engine/profile.h"

namespace primflow {

struct EngineInstance {
  int instance_id = 0;
  SimTime busy_until = 0;
  bool busy = false;
  std::int64_t executed_requests = 0;
  // Tokens of KV cache held on this instance (LLM only).
  std::int64_t kv_occupied = 0;
};

// The share of one primitive node that rides in a batch.
struct BatchRequest {
  std::string query_id;
  std::string node_id;
  PrimitiveKind kind = PrimitiveKind::kEmbedding;
  std::int64_t count = 0;
  // Prefill: tokens per request (after any prefix-cache discount).
  std::int64_t load_per_request = 1;
  // FullPrefilling: tokens computed by the preceding partial prefill.
  std::int64_t prefix_tokens = 0;
  // Decode: tokens per segment, per sequence. One segment for plain decodes.
  std::vector<std::int64_t> segments;
};

struct Batch {
  std::vector<BatchRequest> requests;

  std::int64_t request_count() const;
  // Tokens for prefill batches, sequences for decode, items otherwise.
  std::int64_t load() const;
  bool empty() const { return requests.empty(); }
};

// One request entry finished a segment (decode) or its whole share.
struct CompletionEvent {
  SimTime at = 0;
  std::size_t request_index = 0;
  int segment = 0;
  bool last = true;
};

struct BatchResult {
  SimTime start = 0;
  SimTime end = 0;
  std::vector<CompletionEvent> events;  // sorted by (at, request_index)
};

SimTime ms_to_sim(double ms);

// Duration of a batch on `profile` without touching any instance.
BatchResult plan_batch(const EngineProfile& profile, const Batch& batch,
                       SimTime now);

// Runs a batch on an idle instance. Throws EmptyBatch, CapacityExceeded,
// or Internal when the instance is still busy.
BatchResult execute_batch(EngineInstance& instance,
                          const EngineProfile& profile, const Batch& batch,
                          SimTime now);

// Marks the instance idle again once its batch has drained.
void release_instance(EngineInstance& instance);

// Least executed requests (general) or least occupied KV (LLM) among idle
// instances; ties go to the lower id.
std::optional<int> select_instance(const std::vector<EngineInstance>& instances,
                                   const EngineProfile& profile);

}  // namespace primflow

#endif  // PRIMFLOW_ENGINE_EXECUTOR_H_
