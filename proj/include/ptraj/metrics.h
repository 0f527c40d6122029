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

// Utility metrics comparing an original and a synthetic dataset:
// per-hour trip-length Jensen-Shannon divergence, top-K frequent pattern
// true-positive ratio, and per-hour source/destination earth mover's
// distance.

#ifndef PTRAJ_METRICS_H_
#define PTRAJ_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "ptraj/dataset.h"
#include "ptraj/geo_grid.h"

namespace ptraj {

// Trip length (cell count) -> relative frequency.
using LengthHistogram = std::map<int, double>;

// Empty histogram when the hour has no trajectories.
LengthHistogram TripLengthHistogram(const Dataset& ds, TimeSlot hour);

// Base-2 Jensen-Shannon divergence over the union support, in [0, 1].
// Both histograms must be non-empty.
double JensenShannon(const LengthHistogram& p, const LengthHistogram& q);

// Absent when either dataset has no trajectories in `hour`.
std::optional<double> TripLengthJsd(const Dataset& a, const Dataset& b,
                                    TimeSlot hour);

using Pattern = std::vector<int32_t>;

inline constexpr int kMinPatternLength = 2;
inline constexpr int kMaxPatternLength = 8;

// Contiguous subsequences of length 2..8, each counted at most once per
// trajectory.
std::map<Pattern, int64_t> CountPatterns(const Dataset& ds);

// The k most frequent patterns; ties go to the lexicographically smaller
// cell sequence.
std::vector<Pattern> TopPatterns(const std::map<Pattern, int64_t>& counts,
                                 int k);

struct PatternTpr {
  double value = 0;
  // min(K, distinct patterns in either dataset).
  int k_used = 0;
};

// |top-K(a) ∩ top-K(b)| / K_used. Absent when either dataset has no
// patterns.
std::optional<PatternTpr> FrequentPatternTpr(const Dataset& a,
                                             const Dataset& b, int k);

inline constexpr int kEmdSampleCap = 2000;

// Source/destination pair with its relative mass.
struct PairDistribution {
  std::vector<std::pair<CellId, CellId>> support;  // sorted, deduplicated
  std::vector<int64_t> counts;
  int64_t total = 0;
};

PairDistribution BuildPairDistribution(
    const std::vector<const Trajectory*>& trips);

// Exact earth mover's distance in meters between two pair distributions,
// with ground distance d(src, src') + d(dst, dst').
absl::StatusOr<double> PairEmd(const PairDistribution& a,
                               const PairDistribution& b, const GridSpec& grid);

// Samples at most `cap` trajectories of `hour` from each dataset without
// replacement, using the same engine seed for both, then solves PairEmd.
// Absent when either hour is empty.
absl::StatusOr<std::optional<double>> SourceDestEmd(
    const Dataset& a, const Dataset& b, TimeSlot hour, const GridSpec& grid,
    uint64_t seed, int cap = kEmdSampleCap);

// Trajectories of `hour`, subsampled to `cap` with an engine for (seed, hour).
std::vector<const Trajectory*> SampleHour(const Dataset& ds, TimeSlot hour,
                                          uint64_t seed, int cap);

struct MetricLine {
  std::string metric;           // jsd, tpr or emd
  std::optional<int> hour;      // absent for tpr
  std::optional<int> k;         // tpr only
  std::optional<double> value;  // absent when undefined
  std::optional<int> k_used;    // tpr only
};

struct EvaluationOptions {
  std::vector<int> k_values = {10, 20, 50, 100};
  int emd_cap = kEmdSampleCap;
  uint64_t seed = 0;
};

// All metrics: 24 JSD lines, one TPR line per K, 24 EMD lines.
absl::StatusOr<std::vector<MetricLine>> EvaluateAll(
    const Dataset& original, const Dataset& synthetic, const GridSpec& grid,
    const EvaluationOptions& options);

// `metric=<m> hour=<h|-> k=<K|-> value=<v|absent>[ k_used=<n>]`
std::string FormatMetricLine(const MetricLine& line);
std::string FormatReport(const std::vector<MetricLine>& lines);

}  // namespace ptraj

#endif  // PTRAJ_METRICS_H_
