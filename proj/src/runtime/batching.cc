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


#include "primflow/runtime/batching.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace primflow {
namespace {

std::int64_t phase_slots(const SlotBudget& b, Phase phase) {
  return phase == Phase::kDecode ? b.decode_slots : b.slots;
}

std::int64_t phase_cap(const SlotBudget& b, Phase phase) {
  return phase == Phase::kDecode ? b.decode_slots : b.hard_cap;
}

// Requests of `e` that fit into `slots`, honouring the request cap. A
// single oversize request is admitted when the batch is still empty.
std::int64_t fit(const QueueEntry& e, std::int64_t avail, std::int64_t slots,
                 const SlotBudget& budget, const BatchPlan& plan) {
  std::int64_t per = e.load(1);
  std::int64_t n = per > 0 ? std::min(avail, slots / per) : avail;
  if (budget.max_requests > 0) {
    n = std::min(n, budget.max_requests - plan.requests);
  }
  if (n <= 0 && plan.empty() && avail > 0 &&
      per <= phase_cap(budget, phase_of(e.kind))) {
    n = 1;
  }
  return std::max<std::int64_t>(0, n);
}

void take(BatchPlan& plan, std::vector<std::int64_t>& taken, std::size_t i,
          const QueueEntry& e, std::int64_t n) {
  if (n <= 0) return;
  taken[i] += n;
  plan.load += e.load(n);
  plan.requests += n;
  for (auto& p : plan.picks) {
    if (p.entry == i) {
      p.count += n;
      return;
    }
  }
  plan.picks.push_back({i, n});
}

}  // namespace

Phase phase_of(PrimitiveKind kind) {
  if (is_prefill_like(kind)) return Phase::kPrefill;
  if (is_decode_like(kind)) return Phase::kDecode;
  return Phase::kItem;
}

BatchPlan form_batch_topo(const std::vector<QueueEntry>& queue,
                          const SlotBudget& budget) {
  BatchPlan plan;
  std::map<std::string, std::vector<std::size_t>> by_query;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    if (queue[i].remaining > 0) by_query[queue[i].query_id].push_back(i);
  }
  if (by_query.empty()) return plan;

  struct Bucket {
    SimTime first = 0;
    std::string query;
    std::vector<std::size_t> entries;
  };
  std::vector<Bucket> buckets;
  for (auto& [q, idx] : by_query) {
    Bucket b{queue[idx.front()].arrival, q, idx};
    for (auto i : idx) b.first = std::min(b.first, queue[i].arrival);
    std::sort(b.entries.begin(), b.entries.end(), [&](auto x, auto y) {
      if (queue[x].depth != queue[y].depth) return queue[x].depth > queue[y].depth;
      return queue[x].node_id < queue[y].node_id;
    });
    buckets.push_back(std::move(b));
  }
  std::sort(buckets.begin(), buckets.end(), [](const Bucket& a, const Bucket& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.query < b.query;
  });

  // The most contributive node of the oldest bucket fixes the phase.
  plan.phase = phase_of(queue[buckets.front().entries.front()].kind);
  std::int64_t slots = phase_slots(budget, plan.phase);
  std::vector<std::int64_t> taken(queue.size(), 0);

  bool progress = true;
  while (progress && slots > 0) {
    progress = false;
    for (const auto& b : buckets) {
      if (slots <= 0) break;
      if (budget.max_requests > 0 && plan.requests >= budget.max_requests) break;
      int top = -1;
      for (auto i : b.entries) {
        const auto& e = queue[i];
        if (phase_of(e.kind) != plan.phase || e.remaining - taken[i] <= 0) continue;
        top = std::max(top, e.depth);
      }
      if (top < 0) continue;
      for (auto i : b.entries) {
        const auto& e = queue[i];
        if (e.depth != top || phase_of(e.kind) != plan.phase) continue;
        std::int64_t avail = e.remaining - taken[i];
        if (avail <= 0) continue;
        std::int64_t n = fit(e, avail, slots, budget, plan);
        if (n <= 0) continue;
        take(plan, taken, i, e, n);
        slots = std::max<std::int64_t>(0, slots - e.load(n));
        progress = true;
        if (slots <= 0) break;
      }
    }
  }
  return plan;
}

BatchPlan form_batch_blind(const std::vector<QueueEntry>& queue,
                           const BlindParams& params, SimTime now,
                           std::optional<SimTime>* wake_at) {
  BatchPlan plan;
  if (wake_at) wake_at->reset();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    if (queue[i].remaining > 0) order.push_back(i);
  }
  if (order.empty()) return plan;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (queue[a].arrival != queue[b].arrival) {
      return queue[a].arrival < queue[b].arrival;
    }
    return queue[a].seq < queue[b].seq;
  });
  const auto& budget = params.budget;
  plan.phase = phase_of(queue[order.front()].kind);
  std::int64_t slots = phase_slots(budget, plan.phase);
  std::vector<std::int64_t> taken(queue.size(), 0);

  if (params.per_invocation) {
    std::size_t i = order.front();
    std::int64_t n = fit(queue[i], queue[i].remaining, slots, budget, plan);
    take(plan, taken, i, queue[i], n);
    return plan;
  }

  bool full = false;
  for (auto i : order) {
    const auto& e = queue[i];
    if (phase_of(e.kind) != plan.phase) continue;
    std::int64_t n = fit(e, e.remaining, slots, budget, plan);
    take(plan, taken, i, e, n);
    slots -= e.load(n);
    if (n < e.remaining || slots <= 0 ||
        (budget.max_requests > 0 && plan.requests >= budget.max_requests)) {
      full = true;
      break;
    }
  }
  SimTime oldest = queue[order.front()].arrival;
  if (!full && now - oldest < params.timeout) {
    if (wake_at) *wake_at = oldest + params.timeout;
    return BatchPlan{};
  }
  return plan;
}

}  // namespace primflow
