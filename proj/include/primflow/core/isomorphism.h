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


#ifndef PRIMFLOW_CORE_ISOMORPHISM_H_
#define PRIMFLOW_CORE_ISOMORPHISM_H_

#include <string>
#include <vector>

#include "primflow/core/graph.h"

namespace primflow {

enum class LabelMode {
  kKind,           // primitive kind only
  kKindEngine,     // kind + engine binding
  kFull,           // kind + engine + sizes
};

// Structural equality up to node renaming. Edge keys are ignored; parallel
// edges between one node pair count once.
bool isomorphic(const PGraph& a, const PGraph& b,
                LabelMode mode = LabelMode::kKindEngine);

// Human-readable differences (kind multiset, edge counts, per-kind degree
// profile); empty when the graphs are isomorphic.
std::vector<std::string> structural_diff(const PGraph& a, const PGraph& b,
                                         LabelMode mode = LabelMode::kKindEngine);

}  // namespace primflow

#endif  // PRIMFLOW_CORE_ISOMORPHISM_H_
