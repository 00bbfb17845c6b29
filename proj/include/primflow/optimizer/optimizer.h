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


#ifndef PRIMFLOW_OPTIMIZER_OPTIMIZER_H_
#define PRIMFLOW_OPTIMIZER_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>

#include "primflow/core/graph.h"
#include "primflow/core/template.h"
#include "primflow/engine/profile.h"
#include "primflow/optimizer/passes.h"
#include "primflow/optimizer/transform.h"

namespace primflow {

// Applies the enabled passes in fixed order, each to its fixpoint, then
// assigns depths.
EGraph optimize(const PGraph& p, const ProfileSet& profiles,
                const PassSet& passes);

std::uint64_t optimizer_cache_key(const WorkflowTemplate& t,
                                  const QueryConfig& config,
                                  const ProfileSet& profiles,
                                  const PassSet& passes, Wiring wiring,
                                  bool prefix_cache = false);

struct BuildResult {
  EGraph egraph;
  bool cache_hit = false;
  std::uint64_t key = 0;
};

// transform + optimize with a shared result cache. Safe to call from
// several threads.
class GraphBuilder {
 public:
  explicit GraphBuilder(const ProfileSet& profiles) : profiles_(profiles) {}

  BuildResult build(const WorkflowTemplate& t, const QueryConfig& config,
                    const PassSet& passes,
                    const TransformOptions& options = {});

  std::size_t cache_size() const;
  std::size_t hits() const;
  std::size_t misses() const;
  void clear();

 private:
  const ProfileSet& profiles_;
  mutable std::shared_mutex mu_;
  std::map<std::uint64_t, EGraph> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace primflow

#endif  // PRIMFLOW_OPTIMIZER_OPTIMIZER_H_
