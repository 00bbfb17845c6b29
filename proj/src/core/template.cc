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


#include "primflow/core/template.h"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

#include "primflow/core/error.h"

namespace primflow {
namespace {

constexpr std::array<std::pair<RoleKind, std::string_view>, 9> kRoleNames = {{
    {RoleKind::kIndexing, "indexing"},
    {RoleKind::kQueryEmbedding, "query-embedding"},
    {RoleKind::kSearch, "search"},
    {RoleKind::kRerank, "rerank"},
    {RoleKind::kQueryExpansion, "query-expansion"},
    {RoleKind::kLlmSynthesize, "llm-synthesize"},
    {RoleKind::kProxyJudge, "proxy-judge"},
    {RoleKind::kToolCall, "tool-call"},
    {RoleKind::kContextualize, "contextualize"},
}};

constexpr std::array<std::pair<SynthesisMode, std::string_view>, 3>
    kModeNames = {{
        {SynthesisMode::kRefine, "refine"},
        {SynthesisMode::kTree, "tree"},
        {SynthesisMode::kOneshot, "oneshot"},
    }};

bool engine_fits(RoleKind role, EngineCategory c) {
  switch (role) {
    case RoleKind::kIndexing:
    case RoleKind::kQueryEmbedding: return c == EngineCategory::kEmbedding;
    case RoleKind::kSearch:
      return c == EngineCategory::kSearch || c == EngineCategory::kTool;
    case RoleKind::kRerank: return c == EngineCategory::kRerank;
    case RoleKind::kToolCall: return c == EngineCategory::kTool;
    case RoleKind::kQueryExpansion:
    case RoleKind::kLlmSynthesize:
    case RoleKind::kProxyJudge:
    case RoleKind::kContextualize: return c == EngineCategory::kLlm;
  }
  return false;
}

// Templates are small, so a DFS colouring over component names is enough.
bool has_cycle(const WorkflowTemplate& t) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : t.edges) adj[a].push_back(b);
  std::map<std::string, int> colour;
  std::function<bool(const std::string&)> visit = [&](const std::string& v) {
    colour[v] = 1;
    for (const auto& w : adj[v]) {
      if (colour[w] == 1) return true;
      if (colour[w] == 0 && visit(w)) return true;
    }
    colour[v] = 2;
    return false;
  };
  for (const auto& [a, b] : t.edges) {
    if (colour[a] == 0 && visit(a)) return true;
  }
  return false;
}

}  // namespace

std::string_view role_name(RoleKind role) {
  for (const auto& [r, n] : kRoleNames) {
    if (r == role) return n;
  }
  return "?";
}

std::optional<RoleKind> parse_role(std::string_view name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

std::string_view synthesis_mode_name(SynthesisMode mode) {
  for (const auto& [m, n] : kModeNames) {
    if (m == mode) return n;
  }
  return "?";
}

std::optional<SynthesisMode> parse_synthesis_mode(std::string_view name) {
  for (const auto& [m, n] : kModeNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

const Component* WorkflowTemplate::find(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::int64_t QueryConfig::param(const std::string& component,
                                const std::string& name) const {
  auto it = components.find(component);
  if (it != components.end()) {
    auto p = it->second.params.find(name);
    if (p != it->second.params.end()) return p->second;
  }
  throw Error(ErrorCode::kConfigMissing, component + "." + name);
}

std::int64_t QueryConfig::param_or(const std::string& component,
                                   const std::string& name,
                                   std::int64_t fallback) const {
  auto it = components.find(component);
  if (it == components.end()) return fallback;
  auto p = it->second.params.find(name);
  return p == it->second.params.end() ? fallback : p->second;
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kDuplicateComponent: return "duplicate-component";
    case ViolationKind::kDanglingEdge: return "dangling-edge";
    case ViolationKind::kUnknownEngine: return "unknown-engine";
    case ViolationKind::kEngineCategoryMismatch: return "engine-category";
    case ViolationKind::kMissingKwargs: return "missing-kwargs";
    case ViolationKind::kUnproducedInput: return "unproduced-input";
    case ViolationKind::kUnknownGuard: return "unknown-guard";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(),
                    [&](const Violation& v) { return v.kind == kind; }));
}

ValidationReport validate_template(const WorkflowTemplate& t,
                                   const EngineCatalog& catalog) {
  ValidationReport report;
  auto add = [&](ViolationKind k, std::string comp, std::string detail) {
    report.violations.push_back({k, std::move(comp), std::move(detail)});
  };

  std::set<std::string> names;
  std::set<std::string> produced(t.inputs.begin(), t.inputs.end());
  std::set<std::string> conditions;
  for (const auto& c : t.components) {
    if (!names.insert(c.name).second) {
      add(ViolationKind::kDuplicateComponent, c.name, "name used twice");
    }
    produced.insert(c.out_kwargs.begin(), c.out_kwargs.end());
    if (!c.condition.empty()) {
      conditions.insert(c.condition);
      produced.insert(c.condition);
    }
  }

  for (const auto& [a, b] : t.edges) {
    if (!names.count(a) || !names.count(b)) {
      add(ViolationKind::kDanglingEdge, names.count(a) ? b : a,
          "edge " + a + " -> " + b + " names an unknown component");
    }
  }
  if (has_cycle(t)) {
    add(ViolationKind::kCycle, "", "component edges contain a cycle");
  }

  for (const auto& c : t.components) {
    auto check_engine = [&](const std::string& id, bool aux) {
      auto it = catalog.find(id);
      if (it == catalog.end()) {
        add(ViolationKind::kUnknownEngine, c.name,
            "engine '" + id + "' has no registered profile");
        return;
      }
      bool fits = aux ? it->second == EngineCategory::kIngest
                      : engine_fits(c.role, it->second);
      if (!fits) {
        add(ViolationKind::kEngineCategoryMismatch, c.name,
            "engine '" + id + "' is " + std::string(category_name(it->second)));
      }
    };
    check_engine(c.engine_id, false);
    if (c.role == RoleKind::kIndexing) check_engine(c.aux_engine_id, true);

    if (c.in_kwargs.empty() || c.out_kwargs.empty()) {
      add(ViolationKind::kMissingKwargs, c.name,
          "component needs at least one input and one output key");
    }
    for (const auto& k : c.in_kwargs) {
      if (!produced.count(k)) {
        add(ViolationKind::kUnproducedInput, c.name,
            "input '" + k + "' is never produced");
      }
    }
    if (!c.guard.empty() && !conditions.count(c.guard)) {
      add(ViolationKind::kUnknownGuard, c.name,
          "guard '" + c.guard + "' is not decided by any component");
    }
  }
  return report;
}

void validate_config(const WorkflowTemplate& t, const QueryConfig& c) {
  for (const auto& [name, cc] : c.components) {
    const Component* comp = t.find(name);
    if (!comp) {
      throw Error(ErrorCode::kConfigMissing,
                  "config names unknown component " + name);
    }
    for (const auto& [p, v] : cc.params) {
      if (v < 0) {
        throw Error(ErrorCode::kConfigMissing,
                    name + "." + p + " must be non-negative");
      }
    }
    if (comp->role == RoleKind::kLlmSynthesize &&
        !parse_synthesis_mode(cc.synthesis_mode)) {
      throw Error(ErrorCode::kInvalidMode,
                  name + ": synthesis_mode '" + cc.synthesis_mode + "'");
    }
  }
}

}  // namespace primflow
