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


#ifndef PRIMFLOW_OPTIMIZER_PASSES_H_
#define PRIMFLOW_OPTIMIZER_PASSES_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/core/graph.h"
#include "primflow/engine/profile.h"

namespace primflow {

enum class PassId {
  kDependencyPruning,
  kStageDecomposition,
  kPrefillSplit,
  kDecodePipelining,
};

using PassSet = std::set<PassId>;

// Fixed application order.
inline constexpr PassId kPassOrder[] = {
    PassId::kDependencyPruning, PassId::kStageDecomposition,
    PassId::kPrefillSplit, PassId::kDecodePipelining};

inline constexpr int kMaxFixpointRounds = 8;

std::string_view pass_name(PassId pass);
std::optional<PassId> parse_pass(std::string_view name);
PassSet all_passes();
// Comma-separated names; "all" and "none" are accepted.
PassSet parse_pass_list(std::string_view list);

// Single sweeps; each returns true when the graph changed.
bool prune_dependencies_once(PGraph& g);
bool stage_decompose_once(PGraph& g, const ProfileSet& profiles);
bool split_prefill_once(PGraph& g, const ProfileSet* profiles);
bool pipeline_decode_once(PGraph& g);

// Fixpoint versions. Exceeding kMaxFixpointRounds throws Internal.
PGraph prune_dependencies(const PGraph& g);
PGraph stage_decompose(const PGraph& g, const ProfileSet& profiles);
PGraph split_prefill(const PGraph& g, const ProfileSet* profiles = nullptr);
PGraph pipeline_decode(const PGraph& g);

PGraph run_pass(PassId pass, const PGraph& g, const ProfileSet& profiles);

// Stage size (items or sequences per stage) used by stage decomposition.
std::int64_t stage_size(const PrimitiveNode& node, const ProfileSet& profiles);

// Input-key coverage: every non-external input key of a node must be an
// output of one of its ancestors. Returns the uncovered (node, key) pairs.
std::vector<std::string> semantic_violations(const PGraph& g);

}  // namespace primflow

#endif  // PRIMFLOW_OPTIMIZER_PASSES_H_
