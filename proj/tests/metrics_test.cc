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

#include "ptraj/metrics.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "gtest/gtest.h"

namespace ptraj {
namespace {

Trajectory Trip(std::vector<int32_t> cells, int hour) {
  Trajectory t;
  for (int32_t c : cells) t.cells.push_back(CellId{c});
  t.hour = TimeSlot{hour};
  return t;
}

Dataset Of(std::vector<Trajectory> trips) {
  Dataset ds;
  ds.header = {10, 10, 500.0, false};
  ds.trajectories = std::move(trips);
  return ds;
}

GridSpec Grid() { return *GridSpec::ForDimensions(10, 10, 500); }

// Random trajectories on a 10 x 10 grid; not necessarily contiguous.
Dataset RandomDataset(std::mt19937_64& rng, int n, int alphabet = 100) {
  std::uniform_int_distribution<int> len(2, 9), cell(0, alphabet - 1),
      hour(7, 9);
  std::vector<Trajectory> trips;
  for (int i = 0; i < n; ++i) {
    Trajectory t;
    t.hour = TimeSlot{hour(rng)};
    const int l = len(rng);
    while (static_cast<int>(t.cells.size()) < l) {
      const CellId c{cell(rng)};
      if (t.cells.empty() || t.cells.back() != c) t.cells.push_back(c);
    }
    trips.push_back(std::move(t));
  }
  return Of(std::move(trips));
}

TEST(JsdTest, Examples) {
  const Dataset d = Of({Trip({1, 2}, 8), Trip({1, 2, 3}, 8)});
  EXPECT_EQ(*TripLengthJsd(d, d, TimeSlot{8}), 0.0);
  const Dataset twos = Of({Trip({1, 2}, 8), Trip({3, 4}, 8)});
  const Dataset threes = Of({Trip({1, 2, 3}, 8)});
  EXPECT_DOUBLE_EQ(*TripLengthJsd(twos, threes, TimeSlot{8}), 1.0);
  EXPECT_NEAR(JensenShannon({{2, 0.5}, {3, 0.5}}, {{2, 1.0}}), 0.3113, 1e-4);
}

TEST(JsdTest, EmptyHourIsAbsent) {
  const Dataset d = Of({Trip({1, 2}, 8)});
  EXPECT_FALSE(TripLengthJsd(d, d, TimeSlot{9}).has_value());
}

TEST(JsdTest, HistogramSumsToOne) {
  std::mt19937_64 rng(1);
  const Dataset d = RandomDataset(rng, 300);
  for (int h = 7; h <= 9; ++h) {
    double s = 0;
    for (const auto& [_, f] : TripLengthHistogram(d, TimeSlot{h})) s += f;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(PatternTest, HandCountedTopThree) {
  const Dataset d =
      Of({Trip({1, 2, 3}, 8), Trip({2, 3, 4}, 8), Trip({2, 3}, 9)});
  const auto counts = CountPatterns(d);
  EXPECT_EQ(counts.size(), 5u);
  EXPECT_EQ(counts.at({2, 3}), 3);
  const auto top = TopPatterns(counts, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0], (Pattern{2, 3}));
  EXPECT_EQ(top[1], (Pattern{1, 2}));
  EXPECT_EQ(top[2], (Pattern{1, 2, 3}));
}

TEST(PatternTest, CountedOncePerTrajectory) {
  const auto counts = CountPatterns(Of({Trip({1, 2, 1, 2, 1}, 8)}));
  EXPECT_EQ(counts.at({1, 2}), 1);
  EXPECT_EQ(counts.at({1, 2, 1}), 1);
}

TEST(PatternTest, LengthCappedAtEight) {
  const auto counts =
      CountPatterns(Of({Trip({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 8)}));
  size_t longest = 0;
  for (const auto& [p, _] : counts) longest = std::max(longest, p.size());
  EXPECT_EQ(longest, 8u);
  // 9 + 8 + ... + 3 contiguous windows of length 2..8.
  EXPECT_EQ(counts.size(), 42u);
}

TEST(PatternTest, MatchesBruteForceCounter) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = RandomDataset(rng, 40, 6);
    std::map<Pattern, int64_t> expected;
    for (const Trajectory& t : d.trajectories) {
      std::set<Pattern> mine;
      for (size_t i = 0; i < t.cells.size(); ++i) {
        for (size_t j = i + 2; j <= t.cells.size() && j - i <= 8; ++j) {
          Pattern p;
          for (size_t k = i; k < j; ++k) p.push_back(t.cells[k].index);
          mine.insert(p);
        }
      }
      for (const Pattern& p : mine) ++expected[p];
    }
    EXPECT_EQ(CountPatterns(d), expected);
  }
}

TEST(TprTest, Examples) {
  std::mt19937_64 rng(3);
  const Dataset d = RandomDataset(rng, 100);
  for (int k : {10, 20, 50, 100}) {
    auto t = FrequentPatternTpr(d, d, k);
    ASSERT_TRUE(t.has_value());
    EXPECT_EQ(t->value, 1.0);
    EXPECT_EQ(t->k_used, k);
  }
  const Dataset low = Of({Trip({1, 2, 3}, 8)});
  const Dataset high = Of({Trip({50, 51, 52}, 8)});
  EXPECT_EQ(FrequentPatternTpr(low, high, 10)->value, 0.0);
  EXPECT_EQ(FrequentPatternTpr(low, high, 10)->k_used, 3);
  EXPECT_FALSE(FrequentPatternTpr(low, Of({}), 10).has_value());
}

TEST(TprTest, Symmetric) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const Dataset a = RandomDataset(rng, 50, 8);
    const Dataset b = RandomDataset(rng, 50, 8);
    EXPECT_EQ(FrequentPatternTpr(a, b, 10)->value,
              FrequentPatternTpr(b, a, 10)->value);
  }
}

TEST(EmdTest, SingleTransport) {
  const GridSpec g = Grid();
  const Dataset p = Of({Trip({0, 5}, 8)});
  const Dataset q = Of({Trip({1, 5}, 8)});
  auto e = SourceDestEmd(p, q, TimeSlot{8}, g, 1);
  ASSERT_TRUE(e.ok());
  EXPECT_NEAR(**e, 500.0, 1e-9);
  EXPECT_EQ(**SourceDestEmd(p, p, TimeSlot{8}, g, 1), 0.0);
  EXPECT_FALSE(SourceDestEmd(p, q, TimeSlot{9}, g, 1)->has_value());
}

TEST(EmdTest, PairDistributionIsNormalizedAndDeduplicated) {
  const Dataset d =
      Of({Trip({0, 1, 5}, 8), Trip({0, 5}, 8), Trip({3, 4}, 8)});
  std::vector<const Trajectory*> trips;
  for (const Trajectory& t : d.trajectories) trips.push_back(&t);
  const PairDistribution pd = BuildPairDistribution(trips);
  ASSERT_EQ(pd.support.size(), 2u);
  EXPECT_EQ(pd.counts, (std::vector<int64_t>{2, 1}));
  EXPECT_EQ(pd.total, 3);
  EXPECT_TRUE(std::is_sorted(pd.support.begin(), pd.support.end()));
}

TEST(EmdTest, SymmetricZeroOnlyForEqualAndTriangle) {
  const GridSpec g = Grid();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset a = RandomDataset(rng, 12, 20);
    const Dataset b = RandomDataset(rng, 9, 20);
    const Dataset c = RandomDataset(rng, 7, 20);
    for (int h = 7; h <= 9; ++h) {
      const TimeSlot hour{h};
      auto ab = *SourceDestEmd(a, b, hour, g, 3);
      auto ba = *SourceDestEmd(b, a, hour, g, 3);
      auto bc = *SourceDestEmd(b, c, hour, g, 3);
      auto ac = *SourceDestEmd(a, c, hour, g, 3);
      ASSERT_EQ(ab.has_value(), ba.has_value());
      if (!ab) continue;
      EXPECT_NEAR(*ab, *ba, 1e-9 * (1 + *ab));
      EXPECT_EQ(**SourceDestEmd(a, a, hour, g, 3), 0.0);
      if (bc && ac) EXPECT_LE(*ac, *ab + *bc + 1e-6);
      const auto pa = BuildPairDistribution(SampleHour(a, hour, 3, 2000));
      const auto pb = BuildPairDistribution(SampleHour(b, hour, 3, 2000));
      const bool same = pa.support == pb.support &&
                        pa.counts.size() == pb.counts.size() &&
                        [&] {
                          for (size_t i = 0; i < pa.counts.size(); ++i) {
                            if (pa.counts[i] * pb.total !=
                                pb.counts[i] * pa.total) {
                              return false;
                            }
                          }
                          return true;
                        }();
      EXPECT_EQ(*ab == 0.0, same);
    }
  }
}

TEST(EmdTest, SamplingCapAndDeterminism) {
  std::mt19937_64 rng(6);
  const Dataset d = RandomDataset(rng, 3000);
  const auto s1 = SampleHour(d, TimeSlot{8}, 11, 50);
  const auto s2 = SampleHour(d, TimeSlot{8}, 11, 50);
  EXPECT_EQ(s1.size(), 50u);
  EXPECT_EQ(s1, s2);
  EXPECT_NE(SampleHour(d, TimeSlot{8}, 12, 50), s1);
  std::set<const Trajectory*> distinct(s1.begin(), s1.end());
  EXPECT_EQ(distinct.size(), 50u);
  for (const Trajectory* t : s1) EXPECT_EQ(t->hour.hour, 8);
}

TEST(ReportTest, LineFormat) {
  EXPECT_EQ(FormatMetricLine({"jsd", 8, std::nullopt, 0.25, std::nullopt}),
            "metric=jsd hour=8 k=- value=0.250000");
  EXPECT_EQ(FormatMetricLine({"tpr", std::nullopt, 10, 1.0, 7}),
            "metric=tpr hour=- k=10 value=1.000000 k_used=7");
  EXPECT_EQ(
      FormatMetricLine({"emd", 3, std::nullopt, std::nullopt, std::nullopt}),
      "metric=emd hour=3 k=- value=absent");
}

TEST(ReportTest, SelfEvaluationIsPerfect) {
  std::mt19937_64 rng(7);
  const Dataset d = RandomDataset(rng, 200);
  auto lines = EvaluateAll(d, d, Grid(), EvaluationOptions{});
  ASSERT_TRUE(lines.ok());
  EXPECT_EQ(lines->size(), 24u + 4u + 24u);
  for (const MetricLine& l : *lines) {
    const bool present = l.metric == "tpr" || (*l.hour >= 7 && *l.hour <= 9);
    ASSERT_EQ(l.value.has_value(), present) << FormatMetricLine(l);
    if (!present) continue;
    EXPECT_EQ(*l.value, l.metric == "tpr" ? 1.0 : 0.0) << FormatMetricLine(l);
  }
}

}  // namespace
}  // namespace ptraj
