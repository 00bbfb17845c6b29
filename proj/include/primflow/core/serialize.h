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


#ifndef PRIMFLOW_CORE_SERIALIZE_H_
#define PRIMFLOW_CORE_SERIALIZE_H_

#include <string>
#include <string_view>

#include "primflow/core/graph.h"
#include "primflow/core/template.h"

namespace primflow {

// Canonical JSON: sorted object keys, nodes ordered by id, edges sorted,
// two-space indent, trailing newline. Parsers throw ConfigParse.
std::string serialize_pgraph(const PGraph& g);
std::string serialize_egraph(const EGraph& e);
PGraph parse_pgraph(std::string_view text);
EGraph parse_egraph(std::string_view text);

std::string serialize_template(const WorkflowTemplate& t);
WorkflowTemplate parse_template(std::string_view text);

std::string serialize_config(const QueryConfig& c);
QueryConfig parse_config(std::string_view text);

// Config text with query/app ids blanked; used for cache keys.
std::string config_fingerprint_text(const QueryConfig& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace primflow

#endif  // PRIMFLOW_CORE_SERIALIZE_H_
