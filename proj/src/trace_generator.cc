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

#include "ptraj/trace_generator.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <thread>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace ptraj {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Label {
  double dist = kInf;
  int hops = 0;
  int pred = -1;
  bool settled = false;
};

// Node sequence from the source to `node`.
std::vector<int> TracePath(const std::vector<Label>& labels, int node) {
  std::vector<int> path;
  for (int v = node; v != -1; v = labels[v].pred) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

// True if path(a) + [v] < path(b) + [v], i.e. path(a) < path(b); both paths
// have the same length.
bool LexicographicallyBefore(const std::vector<Label>& labels, int a, int b) {
  return TracePath(labels, a) < TracePath(labels, b);
}

// Bounded FIFO cache of routing graphs for one worker.
class GraphCache {
 public:
  GraphCache(const TpgModel& model, const GridSpec& grid, size_t capacity)
      : model_(model), grid_(grid), capacity_(std::max<size_t>(1, capacity)) {}

  TpgRoutingGraph& Get(int destination, TimeSlot hour) {
    const std::pair<int, int> key{destination, hour.hour};
    auto it = graphs_.find(key);
    if (it != graphs_.end()) return *it->second;
    if (graphs_.size() >= capacity_) {
      graphs_.erase(order_.front());
      order_.pop_front();
    }
    order_.push_back(key);
    auto [ins, _] = graphs_.emplace(
        key, std::make_unique<TpgRoutingGraph>(model_, grid_, destination,
                                               hour));
    return *ins->second;
  }

 private:
  const TpgModel& model_;
  const GridSpec& grid_;
  size_t capacity_;
  std::map<std::pair<int, int>, std::unique_ptr<TpgRoutingGraph>> graphs_;
  std::deque<std::pair<int, int>> order_;
};

struct Draw {
  std::optional<Trajectory> trajectory;
  int64_t same_endpoint = 0;
  int64_t no_path = 0;
};

Draw GenerateOne(const TiModel& ti, const TpgModel& tpg, GraphCache& cache,
                 const GenerateOptions& options, int64_t index) {
  Draw draw;
  Rng rng = DeriveRng(options.seed, RngStream::kGenerate,
                      static_cast<uint64_t>(index));
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    const EndpointTriple triple = ti.Sample(rng);
    if (triple.src == triple.dst) {
      ++draw.same_endpoint;
      continue;
    }
    const std::optional<int32_t> src = tpg.cells().Find(triple.src);
    const std::optional<int32_t> dst = tpg.cells().Find(triple.dst);
    if (!src || !dst) {
      ++draw.no_path;
      continue;
    }
    TpgRoutingGraph& graph = cache.Get(*dst, triple.hour);
    absl::StatusOr<PathResult> path = MostProbablePath(graph, *src, *dst);
    if (!path.ok()) {
      ++draw.no_path;
      continue;
    }
    Trajectory t;
    t.hour = triple.hour;
    t.cells.reserve(path->nodes.size());
    for (int node : path->nodes) t.cells.push_back(tpg.cells().cell(node));
    draw.trajectory = std::move(t);
    return draw;
  }
  return draw;
}

}  // namespace

void ExplicitGraph::AddEdge(int from, int to, double weight) {
  auto& edges = adjacency_[from];
  auto pos = std::lower_bound(
      edges.begin(), edges.end(), to,
      [](const WeightedEdge& e, int target) { return e.to < target; });
  if (pos != edges.end() && pos->to == to) {
    pos->weight = weight;
  } else {
    edges.insert(pos, {to, weight});
  }
}

void ExplicitGraph::AddProbabilityEdge(int from, int to, double p) {
  AddEdge(from, to, TransitionWeight(p));
}

double TransitionWeight(double p) {
  return -std::log(std::max(p, nn::kProbabilityFloor));
}

TpgRoutingGraph::TpgRoutingGraph(const TpgModel& model, const GridSpec& grid,
                                 int destination, TimeSlot hour)
    : model_(model), grid_(grid), destination_(destination), hour_(hour) {}

const std::vector<WeightedEdge>& TpgRoutingGraph::OutEdges(int node) {
  auto it = edges_.find(node);
  if (it != edges_.end()) return it->second;

  const OccupiedCellIndex& cells = model_.cells();
  const NeighborhoodSpec& nb = model_.neighborhood();
  const CellId current = cells.cell(node);
  const nn::Vec dist =
      model_.Forward(model_.params(), node, destination_, hour_.hour);
  const nn::Vec masked = MaskedDistribution(dist, current, grid_, nb, cells);
  std::vector<WeightedEdge> edges;
  for (int cls = 0; cls < nb.class_count(); ++cls) {
    if (cls == nb.center_class()) continue;
    const std::optional<CellId> target = OffsetToCell(current, cls, nb, grid_);
    if (!target) continue;
    const std::optional<int32_t> dense = cells.Find(*target);
    if (!dense) continue;
    edges.push_back({*dense, TransitionWeight(masked[cls])});
  }
  std::sort(edges.begin(), edges.end(),
            [](const WeightedEdge& a, const WeightedEdge& b) {
              return a.to < b.to;
            });
  return edges_.emplace(node, std::move(edges)).first->second;
}

absl::StatusOr<PathResult> MostProbablePath(RoutingGraph& graph, int src,
                                            int dst) {
  const int n = graph.node_count();
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("path endpoints (%d, %d) outside [0, %d)", src, dst, n));
  }
  if (src == dst) {
    return absl::InvalidArgumentError("source equals destination");
  }
  std::vector<Label> labels(n);
  using Key = std::tuple<double, int, int>;  // (dist, hops, node)
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  labels[src].dist = 0;
  heap.emplace(0.0, 0, src);
  while (!heap.empty()) {
    const auto [d, hops, u] = heap.top();
    heap.pop();
    Label& lu = labels[u];
    if (lu.settled || d != lu.dist || hops != lu.hops) continue;
    lu.settled = true;
    if (u == dst) break;
    for (const WeightedEdge& e : graph.OutEdges(u)) {
      Label& lv = labels[e.to];
      if (lv.settled) continue;
      const double nd = d + e.weight;
      const int nh = hops + 1;
      bool better = nd < lv.dist || (nd == lv.dist && nh < lv.hops);
      if (!better && nd == lv.dist && nh == lv.hops && lv.pred != -1) {
        better = LexicographicallyBefore(labels, u, lv.pred);
      }
      if (better) {
        lv.dist = nd;
        lv.hops = nh;
        lv.pred = u;
        heap.emplace(nd, nh, e.to);
      }
    }
  }
  if (!labels[dst].settled) {
    return absl::NotFoundError(
        absl::StrFormat("NoPath: node %d unreachable from %d", dst, src));
  }
  return PathResult{TracePath(labels, dst), labels[dst].dist};
}

absl::StatusOr<Dataset> GenerateSynthetic(const TiModel& ti,
                                          const TpgModel& tpg,
                                          const GridSpec& grid,
                                          const GenerateOptions& options,
                                          GenerateReport* report) {
  if (options.count < 0) {
    return absl::InvalidArgumentError("trajectory count must be >= 0");
  }
  if (ti.cells().cells() != tpg.cells().cells()) {
    return absl::FailedPreconditionError(
        "TI and TPG models were built on different occupied-cell indexes");
  }
  for (CellId c : tpg.cells().cells()) {
    if (!grid.IsValid(c)) {
      return absl::FailedPreconditionError(
          absl::StrFormat("model cell %d lies outside the grid", c.index));
    }
  }

  const int64_t n = options.count;
  std::vector<Draw> draws(n);
  const int threads =
      static_cast<int>(std::max<int64_t>(1, std::min<int64_t>(options.threads,
                                                              std::max<int64_t>(n, 1))));
  auto work = [&](int worker) {
    GraphCache cache(tpg, grid, options.graph_cache_size);
    for (int64_t i = worker; i < n; i += threads) {
      draws[i] = GenerateOne(ti, tpg, cache, options, i);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }

  Dataset out;
  out.header = {grid.n_rows(), grid.n_cols(), grid.cell_size_m(), true};
  GenerateReport local;
  for (Draw& d : draws) {
    local.same_endpoint_resamples += d.same_endpoint;
    local.no_path_resamples += d.no_path;
    if (d.trajectory) {
      out.trajectories.push_back(*std::move(d.trajectory));
      ++local.generated;
    } else {
      ++local.skipped;
    }
  }
  local.retry_warning = n > 0 && local.skipped * 100 > n;
  if (report) *report = local;
  return out;
}

}  // namespace ptraj
