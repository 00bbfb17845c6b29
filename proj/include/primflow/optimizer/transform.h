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


#ifndef PRIMFLOW_OPTIMIZER_TRANSFORM_H_
#define PRIMFLOW_OPTIMIZER_TRANSFORM_H_

#include <string>
#include <vector>

#include "primflow/core/graph.h"
#include "primflow/core/template.h"
#include "primflow/engine/profile.h"

namespace primflow {

struct SubGraph {
  std::vector<PrimitiveNode> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> heads;  // nodes without internal parents
  std::vector<std::string> tails;  // nodes without internal children
};

enum class Wiring {
  // Every template edge becomes tail -> head edges (sequential modules).
  kTemplate,
  // Only component pairs linked by a data key are ordered (module-level
  // parallelism).
  kComponentData,
  // Template edges plus a total order over components in list order: one
  // module runs at a time.
  kSequential,
};

struct TransformOptions {
  Wiring wiring = Wiring::kTemplate;
  // When set, leading static prompt text of each LLM call is declared as
  // cached prefix, discounted by the engine's prefix_cache_discount.
  const ProfileSet* prefix_cache = nullptr;
};

// Throws UnknownRoleKind, ConfigMissing, InvalidMode.
SubGraph decompose_component(const Component& comp, const QueryConfig& config);

// Throws ConfigMissing / InvalidMode / UnknownRoleKind; the result is
// acyclic.
PGraph transform(const WorkflowTemplate& t, const QueryConfig& config,
                 const TransformOptions& options = {});

}  // namespace primflow

#endif  // PRIMFLOW_OPTIMIZER_TRANSFORM_H_
