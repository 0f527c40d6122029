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

#include <cmath>
#include <map>
#include <tuple>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "ptraj/preprocess.h"

namespace ptraj {
namespace {

TEST(TransitionWeightTest, FloorAndRange) {
  EXPECT_DOUBLE_EQ(TransitionWeight(0.5), std::log(2.0));
  EXPECT_EQ(TransitionWeight(1.0), 0.0);
  EXPECT_NEAR(TransitionWeight(0.0), 27.631021115928547, 1e-9);
}

TEST(MostProbablePathTest, SingleEdge) {
  ExplicitGraph g(2);
  g.AddProbabilityEdge(0, 1, 0.5);
  auto p = MostProbablePath(g, 0, 1);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->nodes, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(p->weight, std::log(2.0));
}

TEST(MostProbablePathTest, DiamondPrefersLikelierTwoHop) {
  ExplicitGraph g(3);
  g.AddProbabilityEdge(0, 2, 0.5);
  g.AddProbabilityEdge(0, 1, 0.9);
  g.AddProbabilityEdge(1, 2, 0.9);
  auto p = MostProbablePath(g, 0, 2);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->nodes, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(std::exp(-p->weight), 0.81, 1e-12);
}

TEST(MostProbablePathTest, TiesPreferFewerHopsThenLexicographic) {
  ExplicitGraph g(5);
  // 0 -> 4 directly (weight 2) or via 1 (1 + 1): fewer hops wins.
  g.AddEdge(0, 4, 2);
  g.AddEdge(0, 1, 1);
  g.AddEdge(1, 4, 1);
  EXPECT_EQ(MostProbablePath(g, 0, 4)->nodes, (std::vector<int>{0, 4}));
  // Same weight and hops via 2 or 3: the smaller sequence wins.
  ExplicitGraph h(5);
  h.AddEdge(0, 3, 1);
  h.AddEdge(0, 2, 1);
  h.AddEdge(3, 4, 1);
  h.AddEdge(2, 4, 1);
  EXPECT_EQ(MostProbablePath(h, 0, 4)->nodes, (std::vector<int>{0, 2, 4}));
}

TEST(MostProbablePathTest, Errors) {
  ExplicitGraph g(3);
  g.AddEdge(0, 1, 1);
  EXPECT_EQ(MostProbablePath(g, 0, 2).status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_EQ(MostProbablePath(g, 1, 1).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(MostProbablePath(g, 0, 3).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(MostProbablePathTest, MatchesEnumerationOnRandomGraphs) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> size(2, 8);
    const int n = size(rng);
    ExplicitGraph g(n);
    std::bernoulli_distribution edge(0.4);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && edge(rng)) g.AddProbabilityEdge(a, b, p(rng));
      }
    }
    auto path = MostProbablePath(g, 0, n - 1);
    const std::optional<double> best = oracle::MinSimplePathWeight(g, 0, n - 1);
    ASSERT_EQ(path.ok(), best.has_value());
    if (!best) continue;
    EXPECT_EQ(path->weight, *best);
    EXPECT_EQ(oracle::PathWeight(g, path->nodes), path->weight);
  }
}

// A tiny TPG over a 4 x 4 fully occupied grid.
struct Fixture {
  GridSpec grid = *GridSpec::ForDimensions(4, 4, 100);
  OccupiedCellIndex cells;
  Fixture() {
    std::vector<CellId> all;
    for (int i = 0; i < 16; ++i) all.push_back(CellId{i});
    cells = OccupiedCellIndex(all);
  }
};

TEST(TpgRoutingGraphTest, WeightsBoundedAndDegreeLimited) {
  Fixture f;
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  tpg.Initialize(3);
  TpgRoutingGraph g(tpg, f.grid, 15, TimeSlot{9});
  EXPECT_EQ(g.node_count(), 16);
  for (int v = 0; v < 16; ++v) {
    const auto& edges = g.OutEdges(v);
    EXPECT_LE(edges.size(), 8u);
    for (const WeightedEdge& e : edges) {
      EXPECT_GE(e.weight, 0.0);
      EXPECT_LE(e.weight, -std::log(1e-12) + 1e-12);
      EXPECT_NE(e.to, v);
    }
  }
  EXPECT_EQ(g.OutEdges(0).size(), 3u);  // corner
  EXPECT_EQ(g.OutEdges(5).size(), 8u);  // interior
  EXPECT_EQ(g.expanded_nodes(), 16);
}

TEST(GenerateTest, ZeroCountIsEmpty) {
  Fixture f;
  TiModel ti(f.cells, 4, 2);
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  ti.Initialize(1);
  tpg.Initialize(2);
  auto ds = GenerateSynthetic(ti, tpg, f.grid, {0, 1});
  ASSERT_TRUE(ds.ok());
  EXPECT_EQ(ds->size(), 0u);
  EXPECT_TRUE(ds->header.synthetic);
}

TEST(GenerateTest, DeterministicThreadIndependentAndValid) {
  Fixture f;
  TiModel ti(f.cells, 6, 2);
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  ti.Initialize(1);
  tpg.Initialize(2);
  GenerateOptions opt{200, 42};
  GenerateReport ra, rb;
  auto a = GenerateSynthetic(ti, tpg, f.grid, opt, &ra);
  opt.threads = 3;
  opt.graph_cache_size = 2;
  auto b = GenerateSynthetic(ti, tpg, f.grid, opt, &rb);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->trajectories, b->trajectories);
  EXPECT_EQ(ra.generated, 200);
  EXPECT_EQ(ra.skipped, 0);
  EXPECT_FALSE(ra.retry_warning);
  for (const Trajectory& t : a->trajectories) {
    EXPECT_TRUE(ValidateTrajectory(t, f.grid).ok());
    EXPECT_NE(t.source(), t.destination());
    for (size_t i = 0; i + 1 < t.cells.size(); ++i) {
      EXPECT_LE(ChebyshevDistance(f.grid.ToCoord(t.cells[i]),
                                  f.grid.ToCoord(t.cells[i + 1])),
                1);
    }
  }
  opt.seed = 43;
  EXPECT_NE(GenerateSynthetic(ti, tpg, f.grid, opt)->trajectories,
            a->trajectories);
}

TEST(GenerateTest, SameEndpointsSameHourSamePath) {
  Fixture f;
  TiModel ti(f.cells, 6, 2);
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  ti.Initialize(1);
  tpg.Initialize(2);
  auto ds = GenerateSynthetic(ti, tpg, f.grid, {500, 7});
  ASSERT_TRUE(ds.ok());
  std::map<std::tuple<int, int, int>, std::vector<CellId>> seen;
  for (const Trajectory& t : ds->trajectories) {
    auto key = std::make_tuple(t.source().index, t.destination().index,
                               t.hour.hour);
    auto [it, fresh] = seen.emplace(key, t.cells);
    if (!fresh) EXPECT_EQ(it->second, t.cells);
  }
}

TEST(GenerateTest, ReturnedPathBeatsRandomWalks) {
  Fixture f;
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  tpg.Initialize(5);
  TpgRoutingGraph g(tpg, f.grid, 15, TimeSlot{3});
  auto best = MostProbablePath(g, 0, 15);
  ASSERT_TRUE(best.ok());
  std::mt19937_64 rng(1);
  for (int walk = 0; walk < 500; ++walk) {
    std::vector<int> path = {0};
    std::vector<bool> used(16, false);
    used[0] = true;
    while (path.back() != 15) {
      std::vector<int> options;
      for (const WeightedEdge& e : g.OutEdges(path.back())) {
        if (!used[e.to]) options.push_back(e.to);
      }
      if (options.empty()) break;
      const int next = options[rng() % options.size()];
      used[next] = true;
      path.push_back(next);
    }
    if (path.back() != 15) continue;
    EXPECT_LE(best->weight, *oracle::PathWeight(g, path));
  }
}

TEST(GenerateTest, MismatchedModelsRejected) {
  Fixture f;
  TiModel ti(OccupiedCellIndex({CellId{0}, CellId{1}}), 4, 2);
  TpgModel tpg(f.cells, NeighborhoodSpec{1}, 4, 8);
  EXPECT_FALSE(GenerateSynthetic(ti, tpg, f.grid, {10, 1}).ok());
}

TEST(GenerateTest, DisconnectedCellsAreSkippedAndWarned) {
  // Two cells far apart: no path exists between them.
  const GridSpec grid = *GridSpec::ForDimensions(1, 10, 100);
  const OccupiedCellIndex cells({CellId{0}, CellId{9}});
  TiModel ti(cells, 4, 2);
  TpgModel tpg(cells, NeighborhoodSpec{1}, 4, 8);
  ti.Initialize(1);
  tpg.Initialize(2);
  GenerateReport report;
  auto ds = GenerateSynthetic(ti, tpg, grid, {20, 1, 5}, &report);
  ASSERT_TRUE(ds.ok());
  EXPECT_EQ(ds->size(), 0u);
  EXPECT_EQ(report.skipped, 20);
  EXPECT_TRUE(report.retry_warning);
  EXPECT_EQ(report.no_path_resamples + report.same_endpoint_resamples,
            20 * 6);
}

}  // namespace
}  // namespace ptraj
