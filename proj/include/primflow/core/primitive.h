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

#ifndef PRIMFLOW_CORE_PRIMITIVE_H_
#define PRIMFLOW_CORE_PRIMITIVE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace primflow {

// Simulated time in microseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kMicrosPerMilli = 1000;

inline double to_ms(SimTime t) { return static_cast<double>(t) / 1000.0; }

enum class PrimitiveKind {
  kReranking,
  kIngestion,
  kSearching,
  kEmbedding,
  kPrefilling,
  kDecoding,
  kPartialPrefilling,
  kFullPrefilling,
  kPartialDecoding,
  kCondition,
  kAggregate,
};

inline constexpr int kPrimitiveKindCount = 11;

enum class EngineCategory { kLlm, kEmbedding, kRerank, kSearch, kIngest, kTool };

std::string_view kind_name(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_kind(std::string_view name);
std::string_view category_name(EngineCategory category);
std::optional<EngineCategory> parse_category(std::string_view name);

// Condition and Aggregate run on the orchestrator and never occupy an engine.
bool is_control_flow(PrimitiveKind kind);
bool is_prefill_like(PrimitiveKind kind);
bool is_decode_like(PrimitiveKind kind);
bool is_llm_kind(PrimitiveKind kind);

// The engine category a kind executes on. Searching is the one kind served
// by two categories (vector/web search and tool calls).
std::optional<EngineCategory> primary_category(PrimitiveKind kind);
bool kind_runs_on(PrimitiveKind kind, EngineCategory category);

// One ordered piece of an LLM prompt. `key` names the data key that delivers
// the segment; an empty key means static template text.
struct PromptSegment {
  std::string name;
  std::int64_t tokens = 0;
  std::string key;

  bool operator==(const PromptSegment&) const = default;
};

struct MetadataProfile {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string engine_id;
  // Independent requests carried by the node (items for DNN/DB engines,
  // sequences for LLM engines).
  std::int64_t batch_items = 1;
  // Item count of the node's output; 0 when the output is not item-wise
  // (an index handle, a verdict). Drives pipelining alignment.
  std::int64_t output_items = 1;
  // Per-request prompt for prefill-like kinds, in causal order.
  std::vector<PromptSegment> prompt;
  // Per-request generated tokens for decode-like kinds.
  std::int64_t decode_tokens = 0;
  // FullPrefilling only: tokens already computed by the partial prefill.
  std::int64_t prefix_tokens = 0;
  // Prefix tokens served from a prefix cache (module-parallel baseline).
  std::int64_t cached_prefix_tokens = 0;
  bool batchable = false;
  bool splittable = false;
  // Output cardinality m of a splittable node.
  std::int64_t output_segments = 1;
  // Output size in token equivalents; drives transfer cost.
  std::int64_t payload_tokens = 0;
  std::string query_id;
  std::string app_id;
  std::string component;
  // Set on nodes produced by stage decomposition or decode pipelining.
  std::string stage_of;
  int stage_index = -1;
  // Condition nodes: the declared boolean and its build-time value.
  std::string condition;
  bool condition_value = false;

  std::map<std::string, std::int64_t> token_counts() const;
  std::int64_t prompt_tokens() const;

  bool operator==(const MetadataProfile&) const = default;
};

struct PrimitiveNode {
  std::string node_id;
  PrimitiveKind kind = PrimitiveKind::kAggregate;
  MetadataProfile meta;

  // Scheduling load of one request: tokens for prefills, one sequence for
  // decodes, one item otherwise.
  std::int64_t load_per_request() const;
  std::int64_t request_count() const { return meta.batch_items; }

  bool operator==(const PrimitiveNode&) const = default;
};

}  // namespace primflow

#endif  // PRIMFLOW_CORE_PRIMITIVE_H_
