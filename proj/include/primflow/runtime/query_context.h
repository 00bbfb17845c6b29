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


#ifndef PRIMFLOW_RUNTIME_QUERY_CONTEXT_H_
#define PRIMFLOW_RUNTIME_QUERY_CONTEXT_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "primflow/core/graph.h"

namespace primflow {

struct StoredObject {
  std::string producer;
  std::int64_t items = 0;
  std::int64_t payload_tokens = 0;
  SimTime at = 0;
};

// Per-query bookkeeping of the graph scheduler: remaining in-degrees,
// dispatch state and the object store of produced keys.
class QueryContext {
 public:
  QueryContext(EGraph egraph, SimTime submit);

  const std::string& query_id() const { return egraph_.graph.query_id; }
  const EGraph& egraph() const { return egraph_; }
  const PGraph& graph() const { return egraph_.graph; }
  SimTime submit_time() const { return submit_; }

  // Nodes whose in-degree is zero and that have not been dispatched.
  std::vector<std::string> ready_nodes() const;
  int in_degree(const std::string& node) const;

  // Throws Internal if the node is not ready or was already dispatched, or
  // if one of its non-external input keys is missing from the store.
  void mark_dispatched(const std::string& node);
  bool dispatched(const std::string& node) const;

  // Stores the node's outputs and returns children whose in-degree reached
  // zero. Throws UnknownNode for nodes outside the graph and Internal for a
  // node completed twice.
  std::vector<std::string> on_primitive_complete(const std::string& node,
                                                 SimTime now);

  bool completed(const std::string& node) const;
  bool done() const { return completed_.size() == egraph_.graph.nodes.size(); }
  SimTime finish_time() const { return finish_; }

  const std::map<std::string, StoredObject>& object_store() const {
    return store_;
  }
  const std::vector<std::string>& children(const std::string& node) const;
  const std::vector<std::string>& parents(const std::string& node) const;

 private:
  EGraph egraph_;
  SimTime submit_ = 0;
  SimTime finish_ = 0;
  std::map<std::string, int> indeg_;
  std::map<std::string, std::vector<std::string>> children_;
  std::map<std::string, std::vector<std::string>> parents_;
  std::set<std::string> dispatched_;
  std::set<std::string> completed_;
  std::map<std::string, StoredObject> store_;
};

}  // namespace primflow

#endif  // PRIMFLOW_RUNTIME_QUERY_CONTEXT_H_
