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


#include "primflow/optimizer/optimizer.h"

#include <mutex>

#include "primflow/core/serialize.h"

namespace primflow {

EGraph optimize(const PGraph& p, const ProfileSet& profiles,
                const PassSet& passes) {
  EGraph e;
  e.graph = p;
  for (PassId pass : kPassOrder) {
    if (!passes.count(pass)) continue;
    PGraph next = run_pass(pass, e.graph, profiles);
    if (!(next == e.graph)) e.provenance.emplace_back(pass_name(pass));
    e.graph = std::move(next);
  }
  e.depth = assign_depths(e.graph);
  return e;
}

std::uint64_t optimizer_cache_key(const WorkflowTemplate& t,
                                  const QueryConfig& config,
                                  const ProfileSet& profiles,
                                  const PassSet& passes, Wiring wiring,
                                  bool prefix_cache) {
  std::string text = t.id;
  text += '\n';
  text += config_fingerprint_text(config);
  text += '\n';
  text += std::to_string(profiles.fingerprint());
  for (PassId p : kPassOrder) {
    if (passes.count(p)) {
      text += ',';
      text += pass_name(p);
    }
  }
  text += wiring == Wiring::kTemplate       ? "|template"
          : wiring == Wiring::kSequential ? "|sequential"
                                          : "|data";
  if (prefix_cache) text += "|prefix-cache";
  return fnv1a(text);
}

BuildResult GraphBuilder::build(const WorkflowTemplate& t,
                                const QueryConfig& config,
                                const PassSet& passes,
                                const TransformOptions& options) {
  BuildResult r;
  r.key = optimizer_cache_key(t, config, profiles_, passes, options.wiring,
                              options.prefix_cache != nullptr);
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(r.key);
    if (it != cache_.end()) {
      r.egraph = it->second;
      r.egraph.graph.relabel_query(config.query_id, config.app_id);
      r.cache_hit = true;
    }
  }
  if (r.cache_hit) {
    std::unique_lock lock(mu_);
    ++hits_;
    return r;
  }
  PGraph p = transform(t, config, options);
  r.egraph = optimize(p, profiles_, passes);
  std::unique_lock lock(mu_);
  ++misses_;
  cache_.emplace(r.key, r.egraph);
  return r;
}

std::size_t GraphBuilder::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

std::size_t GraphBuilder::hits() const {
  std::shared_lock lock(mu_);
  return hits_;
}

std::size_t GraphBuilder::misses() const {
  std::shared_lock lock(mu_);
  return misses_;
}

void GraphBuilder::clear() {
  std::unique_lock lock(mu_);
  cache_.clear();
  hits_ = misses_ = 0;
}

}  // namespace primflow
