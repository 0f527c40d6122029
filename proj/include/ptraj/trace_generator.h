// Copyright 2026 The ptraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic trace reconstruction. For a sampled (source, destination, hour)
// the routing graph has an edge x -> y for every valid neighbor y of x with
// weight -ln p(y | x, destination, hour); the minimum-weight path is the
// most probable one.

#ifndef PTRAJ_TRACE_GENERATOR_H_
#define PTRAJ_TRACE_GENERATOR_H_

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "ptraj/dataset.h"
#include "ptraj/geo_grid.h"
#include "ptraj/ti_model.h"
#include "ptraj/tpg_model.h"

namespace ptraj {

struct WeightedEdge {
  int to = 0;
  double weight = 0;
};

class RoutingGraph {
 public:
  virtual ~RoutingGraph() = default;
  virtual int node_count() const = 0;
  // Outgoing edges of `node`, sorted by target. Weights must be >= 0.
  virtual const std::vector<WeightedEdge>& OutEdges(int node) = 0;
};

// Adjacency-list graph.
class ExplicitGraph : public RoutingGraph {
 public:
  explicit ExplicitGraph(int nodes) : adjacency_(nodes) {}
  void AddEdge(int from, int to, double weight);
  // Adds an edge with weight -ln(max(p, 1e-12)).
  void AddProbabilityEdge(int from, int to, double p);
  int node_count() const override {
    return static_cast<int>(adjacency_.size());
  }
  const std::vector<WeightedEdge>& OutEdges(int node) override {
    return adjacency_[node];
  }

 private:
  std::vector<std::vector<WeightedEdge>> adjacency_;
};

// Edge weight for a transition probability, floored at 1e-12.
double TransitionWeight(double p);

// Graph over the model's occupied cells for one (destination, hour). Edge
// lists are computed from the transition model on first use and cached.
class TpgRoutingGraph : public RoutingGraph {
 public:
  TpgRoutingGraph(const TpgModel& model, const GridSpec& grid, int destination,
                  TimeSlot hour);
  int node_count() const override { return model_.cells().size(); }
  const std::vector<WeightedEdge>& OutEdges(int node) override;
  int64_t expanded_nodes() const {
    return static_cast<int64_t>(edges_.size());
  }

 private:
  const TpgModel& model_;
  const GridSpec& grid_;
  int destination_;
  TimeSlot hour_;
  std::unordered_map<int, std::vector<WeightedEdge>> edges_;
};

struct PathResult {
  std::vector<int> nodes;
  double weight = 0;
};

// Minimum total weight path from src to dst; ties broken by fewer hops, then
// lexicographically smaller node sequence. NotFound ("NoPath") if dst is
// unreachable; InvalidArgument if src == dst or a node is out of range.
absl::StatusOr<PathResult> MostProbablePath(RoutingGraph& graph, int src,
                                            int dst);

struct GenerateOptions {
  int64_t count = 0;
  uint64_t seed = 0;
  int max_retries = 20;
  int threads = 1;
  // (destination, hour) graphs kept per worker.
  size_t graph_cache_size = 64;
};

struct GenerateReport {
  int64_t generated = 0;
  int64_t skipped = 0;
  int64_t same_endpoint_resamples = 0;
  int64_t no_path_resamples = 0;
  // More than 1% of draws exhausted their retry budget.
  bool retry_warning = false;
};

// Samples `count` trajectories from the two models. Reads nothing but the
// models and the grid. Trajectory i uses an engine derived from (seed, i),
// so the output does not depend on `threads`.
absl::StatusOr<Dataset> GenerateSynthetic(const TiModel& ti,
                                          const TpgModel& tpg,
                                          const GridSpec& grid,
                                          const GenerateOptions& options,
                                          GenerateReport* report = nullptr);

}  // namespace ptraj

#endif  // PTRAJ_TRACE_GENERATOR_H_
