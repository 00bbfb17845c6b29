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


#include "primflow/core/primitive.h"

#include <array>
#include <utility>

namespace primflow {
namespace {

constexpr std::array<std::pair<PrimitiveKind, std::string_view>,
                     kPrimitiveKindCount>
    kKindNames = {{
        {PrimitiveKind::kReranking, "Reranking"},
        {PrimitiveKind::kIngestion, "Ingestion"},
        {PrimitiveKind::kSearching, "Searching"},
        {PrimitiveKind::kEmbedding, "Embedding"},
        {PrimitiveKind::kPrefilling, "Prefilling"},
        {PrimitiveKind::kDecoding, "Decoding"},
        {PrimitiveKind::kPartialPrefilling, "PartialPrefilling"},
        {PrimitiveKind::kFullPrefilling, "FullPrefilling"},
        {PrimitiveKind::kPartialDecoding, "PartialDecoding"},
        {PrimitiveKind::kCondition, "Condition"},
        {PrimitiveKind::kAggregate, "Aggregate"},
    }};

constexpr std::array<std::pair<EngineCategory, std::string_view>, 6>
    kCategoryNames = {{
        {EngineCategory::kLlm, "llm"},
        {EngineCategory::kEmbedding, "embedding"},
        {EngineCategory::kRerank, "rerank"},
        {EngineCategory::kSearch, "search"},
        {EngineCategory::kIngest, "ingest"},
        {EngineCategory::kTool, "tool"},
    }};

}  // namespace

std::string_view kind_name(PrimitiveKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<PrimitiveKind> parse_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string_view category_name(EngineCategory category) {
  for (const auto& [c, name] : kCategoryNames) {
    if (c == category) return name;
  }
  return "?";
}

std::optional<EngineCategory> parse_category(std::string_view name) {
  for (const auto& [c, n] : kCategoryNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

bool is_control_flow(PrimitiveKind kind) {
  return kind == PrimitiveKind::kCondition || kind == PrimitiveKind::kAggregate;
}

bool is_prefill_like(PrimitiveKind kind) {
  return kind == PrimitiveKind::kPrefilling ||
         kind == PrimitiveKind::kPartialPrefilling ||
         kind == PrimitiveKind::kFullPrefilling;
}

bool is_decode_like(PrimitiveKind kind) {
  return kind == PrimitiveKind::kDecoding ||
         kind == PrimitiveKind::kPartialDecoding;
}

bool is_llm_kind(PrimitiveKind kind) {
  return is_prefill_like(kind) || is_decode_like(kind);
}

std::optional<EngineCategory> primary_category(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kReranking: return EngineCategory::kRerank;
    case PrimitiveKind::kIngestion: return EngineCategory::kIngest;
    case PrimitiveKind::kSearching: return EngineCategory::kSearch;
    case PrimitiveKind::kEmbedding: return EngineCategory::kEmbedding;
    case PrimitiveKind::kCondition:
    case PrimitiveKind::kAggregate: return std::nullopt;
    default: return EngineCategory::kLlm;
  }
}

bool kind_runs_on(PrimitiveKind kind, EngineCategory category) {
  if (kind == PrimitiveKind::kSearching && category == EngineCategory::kTool) {
    return true;
  }
  auto primary = primary_category(kind);
  return primary && *primary == category;
}

std::map<std::string, std::int64_t> MetadataProfile::token_counts() const {
  std::map<std::string, std::int64_t> counts;
  for (const auto& seg : prompt) counts[seg.name] += seg.tokens;
  if (decode_tokens > 0) counts["decode"] = decode_tokens;
  return counts;
}

std::int64_t MetadataProfile::prompt_tokens() const {
  std::int64_t total = 0;
  for (const auto& seg : prompt) total += seg.tokens;
  return total;
}

std::int64_t PrimitiveNode::load_per_request() const {
  if (is_prefill_like(kind)) {
    std::int64_t t = meta.prompt_tokens() - meta.cached_prefix_tokens;
    return t > 0 ? t : 1;
  }
  return 1;
}

}  // namespace primflow
