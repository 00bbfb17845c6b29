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


#include "primflow/runtime/query_context.h"

#include "primflow/core/error.h"

namespace primflow {

QueryContext::QueryContext(EGraph egraph, SimTime submit)
    : egraph_(std::move(egraph)), submit_(submit) {
  const auto& g = egraph_.graph;
  for (const auto& [id, n] : g.nodes) {
    indeg_[id] = 0;
    children_[id];
    parents_[id];
  }
  for (const auto& [id, n] : g.nodes) {
    children_[id] = g.children(id);
    parents_[id] = g.parents(id);
    indeg_[id] = static_cast<int>(parents_[id].size());
  }
  if (egraph_.depth.size() != g.nodes.size()) {
    egraph_.depth = assign_depths(g);
  }
}

std::vector<std::string> QueryContext::ready_nodes() const {
  std::vector<std::string> out;
  for (const auto& [id, d] : indeg_) {
    if (d == 0 && !dispatched_.count(id) && !completed_.count(id)) {
      out.push_back(id);
    }
  }
  return out;
}

int QueryContext::in_degree(const std::string& node) const {
  auto it = indeg_.find(node);
  if (it == indeg_.end()) throw Error(ErrorCode::kUnknownNode, node);
  return it->second;
}

void QueryContext::mark_dispatched(const std::string& node) {
  if (in_degree(node) != 0) {
    throw Error(ErrorCode::kInternal, node + " dispatched before its parents");
  }
  if (!dispatched_.insert(node).second) {
    throw Error(ErrorCode::kInternal, node + " dispatched twice");
  }
  const auto& g = egraph_.graph;
  for (const auto& key : g.node(node).meta.inputs) {
    if (g.external_inputs.count(key)) continue;
    if (!store_.count(key)) {
      throw Error(ErrorCode::kInternal,
                  node + " dispatched without input " + key);
    }
  }
}

bool QueryContext::dispatched(const std::string& node) const {
  return dispatched_.count(node) > 0;
}

std::vector<std::string> QueryContext::on_primitive_complete(
    const std::string& node, SimTime now) {
  if (!indeg_.count(node)) throw Error(ErrorCode::kUnknownNode, node);
  if (!completed_.insert(node).second) {
    throw Error(ErrorCode::kInternal, node + " completed twice");
  }
  const auto& n = egraph_.graph.node(node);
  for (const auto& key : n.meta.outputs) {
    store_[key] = {node, n.meta.output_items, n.meta.payload_tokens, now};
  }
  std::vector<std::string> ready;
  for (const auto& c : children_.at(node)) {
    if (--indeg_[c] == 0) ready.push_back(c);
  }
  if (done()) finish_ = now;
  return ready;
}

bool QueryContext::completed(const std::string& node) const {
  return completed_.count(node) > 0;
}

const std::vector<std::string>& QueryContext::children(
    const std::string& node) const {
  auto it = children_.find(node);
  if (it == children_.end()) throw Error(ErrorCode::kUnknownNode, node);
  return it->second;
}

const std::vector<std::string>& QueryContext::parents(
    const std::string& node) const {
  auto it = parents_.find(node);
  if (it == parents_.end()) throw Error(ErrorCode::kUnknownNode, node);
  return it->second;
}

}  // namespace primflow
