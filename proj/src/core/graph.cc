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


#include "primflow/core/graph.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <ranges>

#include "primflow/core/error.h"

namespace primflow {

void PGraph::add_node(PrimitiveNode node) {
  std::string id = node.node_id;
  if (nodes.count(id)) {
    throw Error(ErrorCode::kInvalidGraph, "duplicate node id " + id);
  }
  nodes.emplace(std::move(id), std::move(node));
}

void PGraph::remove_node(const std::string& id) {
  nodes.erase(id);
  std::erase_if(edges_, [&](const Edge& e) { return e.from == id || e.to == id; });
}

void PGraph::add_edge(Edge edge) {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), edge);
  if (it != edges_.end() && *it == edge) return;
  edges_.insert(it, std::move(edge));
}

void PGraph::remove_edge(const Edge& edge) {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), edge);
  if (it != edges_.end() && *it == edge) edges_.erase(it);
}

void PGraph::remove_edges_between(const std::string& from,
                                  const std::string& to) {
  std::erase_if(edges_,
                [&](const Edge& e) { return e.from == from && e.to == to; });
}

void PGraph::set_edges(std::vector<Edge> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

const PrimitiveNode& PGraph::node(const std::string& id) const {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::kUnknownNode, id);
  return it->second;
}

PrimitiveNode& PGraph::node(const std::string& id) {
  auto it = nodes.find(id);
  if (it == nodes.end()) throw Error(ErrorCode::kUnknownNode, id);
  return it->second;
}

std::vector<std::string> PGraph::parents(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.to == id) out.push_back(e.from);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> PGraph::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.from == id) out.push_back(e.to);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Edge> PGraph::in_edges(const std::string& id) const {
  std::vector<Edge> out;
  for (const auto& e : edges_) {
    if (e.to == id) out.push_back(e);
  }
  return out;
}

std::vector<Edge> PGraph::out_edges(const std::string& id) const {
  std::vector<Edge> out;
  for (const auto& e : edges_) {
    if (e.from == id) out.push_back(e);
  }
  return out;
}

std::vector<std::string> PGraph::sources() const {
  std::set<std::string> has_parent;
  for (const auto& e : edges_) has_parent.insert(e.to);
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes) {
    if (!has_parent.count(id)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> PGraph::sinks() const {
  std::set<std::string> has_child;
  for (const auto& e : edges_) has_child.insert(e.from);
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes) {
    if (!has_child.count(id)) out.push_back(id);
  }
  return out;
}

void PGraph::relabel_query(const std::string& qid, const std::string& aid) {
  query_id = qid;
  app_id = aid;
  for (auto& [id, n] : nodes) {
    n.meta.query_id = qid;
    n.meta.app_id = aid;
  }
}

std::vector<std::string> topo_sort(const PGraph& g) {
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [id, n] : g.nodes) indeg[id] = 0;
  for (const auto& e : g.edges()) {
    if (!g.nodes.count(e.from) || !g.nodes.count(e.to)) {
      throw Error(ErrorCode::kInvalidGraph,
                  "edge endpoint missing: " + e.from + " -> " + e.to);
    }
  }
  for (const auto& id : std::views::keys(g.nodes)) {
    for (const auto& c : g.children(id)) {
      adj[id].push_back(c);
      ++indeg[c];
    }
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>>
      ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.push(id);
  }
  std::vector<std::string> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& c : adj[id]) {
      if (--indeg[c] == 0) ready.push(c);
    }
  }
  if (order.size() != g.nodes.size()) {
    throw Error(ErrorCode::kCyclicGraph,
                "graph " + g.query_id + " contains a cycle");
  }
  return order;
}

std::map<std::string, int> assign_depths(const PGraph& g) {
  auto order = topo_sort(g);
  std::map<std::string, int> depth;
  for (const auto& id : order) depth[id] = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (const auto& p : g.parents(*it)) {
      depth[p] = std::max(depth[p], depth[*it] + 1);
    }
  }
  return depth;
}

bool is_acyclic(const PGraph& g) {
  try {
    topo_sort(g);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCyclicGraph) return false;
    throw;
  }
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

void validate_graph(const PGraph& g, const EngineCatalog* catalog) {
  for (const auto& [id, n] : g.nodes) {
    if (id != n.node_id) {
      throw Error(ErrorCode::kInvalidGraph, "node key mismatch for " + id);
    }
    const auto& m = n.meta;
    if (m.batch_items < 1) {
      throw Error(ErrorCode::kInvalidGraph, id + ": batch_items < 1");
    }
    if (m.output_items < 0 || m.decode_tokens < 0 || m.prefix_tokens < 0 ||
        m.payload_tokens < 0 || m.cached_prefix_tokens < 0) {
      throw Error(ErrorCode::kInvalidGraph, id + ": negative count");
    }
    for (const auto& seg : m.prompt) {
      if (seg.tokens < 0) {
        throw Error(ErrorCode::kInvalidGraph, id + ": negative token count");
      }
    }
    if (m.splittable && m.output_segments < 1) {
      throw Error(ErrorCode::kInvalidGraph,
                  id + ": splittable without output cardinality");
    }
    if (catalog && !is_control_flow(n.kind)) {
      auto it = catalog->find(m.engine_id);
      if (it == catalog->end()) {
        throw Error(ErrorCode::kInvalidGraph,
                    id + ": unknown engine '" + m.engine_id + "'");
      }
      if (!kind_runs_on(n.kind, it->second)) {
        throw Error(ErrorCode::kInvalidGraph,
                    id + ": kind cannot run on engine " + m.engine_id);
      }
    }
  }
  for (const auto& e : g.edges()) {
    auto from = g.nodes.find(e.from);
    auto to = g.nodes.find(e.to);
    if (from == g.nodes.end() || to == g.nodes.end()) {
      throw Error(ErrorCode::kInvalidGraph,
                  "dangling edge " + e.from + " -> " + e.to);
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::kCyclicGraph, "self loop on " + e.from);
    }
    if (!e.key.empty() && (!contains(from->second.meta.outputs, e.key) ||
                           !contains(to->second.meta.inputs, e.key))) {
      throw Error(ErrorCode::kInvalidGraph, "edge " + e.from + " -> " + e.to +
                                                " carries undeclared key " +
                                                e.key);
    }
  }
  topo_sort(g);
}

void validate_egraph(const EGraph& e, const EngineCatalog* catalog) {
  validate_graph(e.graph, catalog);
  for (const auto& [id, n] : e.graph.nodes) {
    auto it = e.depth.find(id);
    if (it == e.depth.end() || it->second < 0) {
      throw Error(ErrorCode::kInvalidGraph, id + ": missing depth");
    }
  }
  for (const auto& edge : e.graph.edges()) {
    if (e.depth.at(edge.from) <= e.depth.at(edge.to)) {
      throw Error(ErrorCode::kInvalidGraph,
                  "depth does not decrease along " + edge.from + " -> " +
                      edge.to);
    }
  }
}

std::set<std::string> ancestors(const PGraph& g, const std::string& id) {
  std::set<std::string> seen;
  std::vector<std::string> stack = g.parents(id);
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (auto& p : g.parents(cur)) stack.push_back(std::move(p));
  }
  return seen;
}

}  // namespace primflow
