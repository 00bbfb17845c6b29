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


#ifndef PRIMFLOW_CORE_TEMPLATE_H_
#define PRIMFLOW_CORE_TEMPLATE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "primflow/core/graph.h"

namespace primflow {

enum class RoleKind {
  kIndexing,
  kQueryEmbedding,
  kSearch,
  kRerank,
  kQueryExpansion,
  kLlmSynthesize,
  kProxyJudge,
  kToolCall,
  kContextualize,
};

std::string_view role_name(RoleKind role);
std::optional<RoleKind> parse_role(std::string_view name);

struct Component {
  std::string name;
  RoleKind role = RoleKind::kQueryEmbedding;
  std::string engine_id;
  // Second engine for two-engine roles (indexing writes to a vector DB).
  std::string aux_engine_id;
  std::vector<std::string> in_kwargs;
  std::vector<std::string> out_kwargs;
  bool batchable = false;
  bool splittable = false;
  // Boolean the component is gated on; false prunes it at build time.
  std::string guard;
  // proxy/judge only: emit a Condition primitive deciding this boolean.
  std::string condition;

  bool operator==(const Component&) const = default;
};

struct WorkflowTemplate {
  std::string id;
  // Keys supplied with the query.
  std::vector<std::string> inputs;
  std::vector<Component> components;
  std::vector<std::pair<std::string, std::string>> edges;

  const Component* find(const std::string& name) const;

  bool operator==(const WorkflowTemplate&) const = default;
};

enum class SynthesisMode { kRefine, kTree, kOneshot };

std::string_view synthesis_mode_name(SynthesisMode mode);
std::optional<SynthesisMode> parse_synthesis_mode(std::string_view name);

struct ComponentConfig {
  std::map<std::string, std::int64_t> params;
  std::string synthesis_mode;

  bool operator==(const ComponentConfig&) const = default;
};

struct QueryConfig {
  std::string query_id;
  std::string app_id;
  std::map<std::string, ComponentConfig> components;
  std::map<std::string, bool> conditions;

  // Throws ConfigMissing when absent.
  std::int64_t param(const std::string& component,
                     const std::string& name) const;
  std::int64_t param_or(const std::string& component, const std::string& name,
                        std::int64_t fallback) const;

  bool operator==(const QueryConfig&) const = default;
};

enum class ViolationKind {
  kCycle,
  kDuplicateComponent,
  kDanglingEdge,
  kUnknownEngine,
  kEngineCategoryMismatch,
  kMissingKwargs,
  kUnproducedInput,
  kUnknownGuard,
};

std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string component;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

// Never throws; an empty report means the template can be transformed.
ValidationReport validate_template(const WorkflowTemplate& t,
                                   const EngineCatalog& catalog);

// Throws ConfigMissing for unknown component names and InvalidMode for an
// unrecognised synthesis mode; counts must be non-negative.
void validate_config(const WorkflowTemplate& t, const QueryConfig& c);

}  // namespace primflow

#endif  // PRIMFLOW_CORE_TEMPLATE_H_
