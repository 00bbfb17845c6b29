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


#include "primflow/core/isomorphism.h"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace primflow {
namespace {

struct Indexed {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> out;
  std::vector<std::vector<int>> in;
  std::set<std::pair<int, int>> edges;
};

std::string node_label(const PrimitiveNode& n, LabelMode mode) {
  std::ostringstream s;
  s << kind_name(n.kind);
  if (mode != LabelMode::kKind) s << "@" << n.meta.engine_id;
  if (mode == LabelMode::kFull) {
    s << "|b" << n.meta.batch_items << "|o" << n.meta.output_items << "|p"
      << n.meta.prompt_tokens() << "|d" << n.meta.decode_tokens << "|x"
      << n.meta.prefix_tokens;
  }
  return s.str();
}

Indexed index_graph(const PGraph& g, LabelMode mode) {
  Indexed x;
  std::map<std::string, int> pos;
  for (const auto& [id, n] : g.nodes) {
    pos[id] = static_cast<int>(x.ids.size());
    x.ids.push_back(id);
    x.labels.push_back(node_label(n, mode));
  }
  x.out.resize(x.ids.size());
  x.in.resize(x.ids.size());
  for (const auto& e : g.edges()) {
    int a = pos.at(e.from);
    int b = pos.at(e.to);
    if (x.edges.insert({a, b}).second) {
      x.out[a].push_back(b);
      x.in[b].push_back(a);
    }
  }
  return x;
}

// Colour refinement run jointly over both graphs so colour ids are shared.
void refine(const Indexed& a, const Indexed& b, std::vector<int>& ca,
            std::vector<int>& cb) {
  std::map<std::string, int> dict;
  auto init = [&](const Indexed& x, std::vector<int>& c) {
    c.resize(x.ids.size());
    for (std::size_t i = 0; i < x.ids.size(); ++i) {
      c[i] = dict.emplace(x.labels[i], static_cast<int>(dict.size()))
                 .first->second;
    }
  };
  init(a, ca);
  init(b, cb);
  std::size_t classes = dict.size();
  for (int round = 0; round < 64; ++round) {
    std::map<std::string, int> next;
    auto step = [&](const Indexed& x, const std::vector<int>& c) {
      std::vector<int> nc(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) {
        std::vector<int> ins, outs;
        for (int p : x.in[i]) ins.push_back(c[p]);
        for (int q : x.out[i]) outs.push_back(c[q]);
        std::sort(ins.begin(), ins.end());
        std::sort(outs.begin(), outs.end());
        std::ostringstream s;
        s << c[i] << "|";
        for (int v : ins) s << v << ",";
        s << "|";
        for (int v : outs) s << v << ",";
        nc[i] = next.emplace(s.str(), static_cast<int>(next.size()))
                    .first->second;
      }
      return nc;
    };
    auto na = step(a, ca);
    auto nb = step(b, cb);
    ca = std::move(na);
    cb = std::move(nb);
    if (next.size() == classes) break;
    classes = next.size();
  }
}

std::map<int, int> histogram(const std::vector<int>& c) {
  std::map<int, int> h;
  for (int v : c) ++h[v];
  return h;
}

bool match(const Indexed& a, const Indexed& b, const std::vector<int>& ca,
           const std::vector<int>& cb) {
  const std::size_t n = a.ids.size();
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  auto hist = histogram(ca);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return hist[ca[x]] < hist[ca[y]];
  });
  std::vector<int> map_ab(n, -1), map_ba(n, -1);
  std::function<bool(std::size_t)> rec = [&](std::size_t k) {
    if (k == n) return true;
    int u = order[k];
    for (std::size_t v = 0; v < n; ++v) {
      if (map_ba[v] != -1 || cb[v] != ca[u]) continue;
      bool ok = true;
      for (int p : a.in[u]) {
        if (map_ab[p] != -1 && !b.edges.count({map_ab[p], static_cast<int>(v)})) {
          ok = false;
          break;
        }
      }
      for (int q : a.out[u]) {
        if (!ok) break;
        if (map_ab[q] != -1 && !b.edges.count({static_cast<int>(v), map_ab[q]})) {
          ok = false;
        }
      }
      if (!ok) continue;
      map_ab[u] = static_cast<int>(v);
      map_ba[v] = u;
      if (rec(k + 1)) return true;
      map_ab[u] = -1;
      map_ba[v] = -1;
    }
    return false;
  };
  return rec(0);
}

}  // namespace

bool isomorphic(const PGraph& ga, const PGraph& gb, LabelMode mode) {
  if (ga.nodes.size() != gb.nodes.size()) return false;
  Indexed a = index_graph(ga, mode);
  Indexed b = index_graph(gb, mode);
  if (a.edges.size() != b.edges.size()) return false;
  std::vector<int> ca, cb;
  refine(a, b, ca, cb);
  if (histogram(ca) != histogram(cb)) return false;
  return match(a, b, ca, cb);
}

std::vector<std::string> structural_diff(const PGraph& ga, const PGraph& gb,
                                         LabelMode mode) {
  std::vector<std::string> diff;
  Indexed a = index_graph(ga, mode);
  Indexed b = index_graph(gb, mode);
  std::map<std::string, int> la, lb;
  for (const auto& l : a.labels) ++la[l];
  for (const auto& l : b.labels) ++lb[l];
  std::set<std::string> all;
  for (const auto& [l, c] : la) all.insert(l);
  for (const auto& [l, c] : lb) all.insert(l);
  for (const auto& l : all) {
    if (la[l] != lb[l]) {
      diff.push_back("label " + l + ": " + std::to_string(la[l]) + " vs " +
                     std::to_string(lb[l]));
    }
  }
  if (a.edges.size() != b.edges.size()) {
    diff.push_back("edges: " + std::to_string(a.edges.size()) + " vs " +
                   std::to_string(b.edges.size()));
  }
  // Per-label edge relation, to point at where the wiring differs.
  auto relation = [](const Indexed& x) {
    std::map<std::string, int> r;
    for (const auto& [s, t] : x.edges) ++r[x.labels[s] + " -> " + x.labels[t]];
    return r;
  };
  auto ra = relation(a);
  auto rb = relation(b);
  std::set<std::string> rel;
  for (const auto& [k, v] : ra) rel.insert(k);
  for (const auto& [k, v] : rb) rel.insert(k);
  for (const auto& k : rel) {
    if (ra[k] != rb[k]) {
      diff.push_back("edge " + k + ": " + std::to_string(ra[k]) + " vs " +
                     std::to_string(rb[k]));
    }
  }
  if (diff.empty() && !isomorphic(ga, gb, mode)) {
    diff.push_back("same label and edge statistics but no isomorphism");
  }
  return diff;
}

}  // namespace primflow
