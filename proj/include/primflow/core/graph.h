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


#ifndef PRIMFLOW_CORE_GRAPH_H_
#define PRIMFLOW_CORE_GRAPH_H_

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "primflow/core/primitive.h"

namespace primflow {

// A directed dependency. `key` is the data key carried from producer to
// consumer; an empty key marks an ordering-only edge inherited from the
// template, which dependency pruning removes.
struct Edge {
  std::string from;
  std::string to;
  std::string key;

  auto operator<=>(const Edge&) const = default;
  bool operator==(const Edge&) const = default;
};

// Engine id -> category, used to resolve node bindings.
using EngineCatalog = std::map<std::string, EngineCategory>;

class PGraph {
 public:
  std::string query_id;
  std::string app_id;
  // Keys available when the query is submitted (question, documents, ...).
  std::set<std::string> external_inputs;
  std::map<std::string, PrimitiveNode> nodes;

  void add_node(PrimitiveNode node);
  void remove_node(const std::string& id);
  // Duplicate edges are ignored.
  void add_edge(Edge edge);
  void remove_edge(const Edge& edge);
  void remove_edges_between(const std::string& from, const std::string& to);
  void set_edges(std::vector<Edge> edges);

  const std::vector<Edge>& edges() const { return edges_; }
  bool has_node(const std::string& id) const { return nodes.count(id) > 0; }
  const PrimitiveNode& node(const std::string& id) const;
  PrimitiveNode& node(const std::string& id);

  // Distinct neighbours, sorted by id.
  std::vector<std::string> parents(const std::string& id) const;
  std::vector<std::string> children(const std::string& id) const;
  std::vector<Edge> in_edges(const std::string& id) const;
  std::vector<Edge> out_edges(const std::string& id) const;
  std::vector<std::string> sources() const;
  std::vector<std::string> sinks() const;

  // Rewrites query_id/app_id on the graph and every node.
  void relabel_query(const std::string& query_id, const std::string& app_id);

  bool operator==(const PGraph&) const = default;

 private:
  std::vector<Edge> edges_;  // sorted, unique
};

struct EGraph {
  PGraph graph;
  std::map<std::string, int> depth;
  // Passes that changed the graph, in application order.
  std::vector<std::string> provenance;

  bool operator==(const EGraph&) const = default;
};

// Kahn's algorithm; among ready nodes the smallest id goes first.
std::vector<std::string> topo_sort(const PGraph& g);

// Sinks get depth 0; a parent sits one above its deepest child.
std::map<std::string, int> assign_depths(const PGraph& g);

bool is_acyclic(const PGraph& g);

// Throws InvalidGraph (or CyclicGraph) on the first violated structural
// invariant. With a catalog, engine bindings are checked as well.
void validate_graph(const PGraph& g, const EngineCatalog* catalog = nullptr);
void validate_egraph(const EGraph& e, const EngineCatalog* catalog = nullptr);

// Nodes that can reach `id` (excluding itself).
std::set<std::string> ancestors(const PGraph& g, const std::string& id);

}  // namespace primflow

#endif  // PRIMFLOW_CORE_GRAPH_H_
