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


#ifndef PRIMFLOW_WORKLOADS_APPS_H_
#define PRIMFLOW_WORKLOADS_APPS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "primflow/core/template.h"
#include "primflow/engine/profile.h"

namespace primflow {

enum class AppKind {
  kSearchEngineGen,
  kLlmAgent,
  kNaiveRagQa,
  kAdvancedRagQa,
  kContextualRetrieval,
};

inline constexpr AppKind kAllApps[] = {
    AppKind::kSearchEngineGen, AppKind::kLlmAgent, AppKind::kNaiveRagQa,
    AppKind::kAdvancedRagQa, AppKind::kContextualRetrieval};

std::string_view app_name(AppKind app);
std::optional<AppKind> parse_app(std::string_view name);
// Throws UnknownApp.
AppKind app_from_name(std::string_view name);

WorkflowTemplate build_app_template(AppKind app);

// Default per-query configuration; derived counts are already consistent.
QueryConfig default_app_config(AppKind app, const std::string& query_id);

// Recomputes counts that follow from other parameters (e.g. rerank
// candidates = queries x top_k) after sampling.
void finalize_config(AppKind app, QueryConfig& config);

// Engine profiles serving every built-in template.
ProfileSet default_profiles();

}  // namespace primflow

#endif  // PRIMFLOW_WORKLOADS_APPS_H_
