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


#ifndef PRIMFLOW_RUNTIME_BATCHING_H_
#define PRIMFLOW_RUNTIME_BATCHING_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include "primflow/core/primitive.h"

namespace primflow {

enum class Phase { kItem, kPrefill, kDecode };

Phase phase_of(PrimitiveKind kind);

// A primitive node waiting at an engine, with the requests not yet batched.
struct QueueEntry {
  std::string query_id;
  std::string node_id;
  PrimitiveKind kind = PrimitiveKind::kEmbedding;
  SimTime arrival = 0;
  int depth = 0;
  std::int64_t remaining = 0;
  std::int64_t load_per_request = 1;
  std::int64_t prefix_tokens = 0;
  std::vector<std::int64_t> segments;
  std::uint64_t seq = 0;

  std::int64_t load(std::int64_t count) const {
    return phase_of(kind) == Phase::kPrefill ? count * load_per_request : count;
  }
};

struct BatchPick {
  std::size_t entry = 0;  // index into the queue passed to the planner
  std::int64_t count = 0;
};

struct BatchPlan {
  std::vector<BatchPick> picks;
  std::int64_t load = 0;
  std::int64_t requests = 0;
  Phase phase = Phase::kItem;

  bool empty() const { return picks.empty(); }
};

// Per-phase capacities handed to a batch planner.
struct SlotBudget {
  // Tokens (prefill) or items per batch the planner aims for.
  std::int64_t slots = 1;
  // Absolute per-batch capacity; one oversize request may use it alone.
  std::int64_t hard_cap = 1;
  // Sequences per decode batch.
  std::int64_t decode_slots = 1;
  // Requests per batch; 0 means unlimited.
  std::int64_t max_requests = 0;
};

// Per-query buckets ordered by their earliest arrival (ties: lower query
// id); each pass over the buckets takes requests from the deepest pending
// node(s) of every bucket until the slots run out.
BatchPlan form_batch_topo(const std::vector<QueueEntry>& queue,
                          const SlotBudget& budget);

struct BlindParams {
  SlotBudget budget;
  SimTime timeout = 10 * kMicrosPerMilli;
  // PO: one invocation bundle per batch. TO: fill across bundles.
  bool per_invocation = false;
};

// FIFO batching. When TO cannot fill a batch and the oldest entry has not
// yet waited `timeout`, the plan is empty and `wake_at` is set.
BatchPlan form_batch_blind(const std::vector<QueueEntry>& queue,
                           const BlindParams& params, SimTime now,
                           std::optional<SimTime>* wake_at = nullptr);

}  // namespace primflow

#endif  // PRIMFLOW_RUNTIME_BATCHING_H_
