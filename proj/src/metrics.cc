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
#include <cmath>
#include <numeric>
#include <set>

#include "Eigen/Core"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ptraj/rng.h"
#include "ptraj/transport.h"

namespace ptraj {
namespace {

double KlTerm(double p, double m) { return p > 0 ? p * std::log2(p / m) : 0; }

}  // namespace

LengthHistogram TripLengthHistogram(const Dataset& ds, TimeSlot hour) {
  LengthHistogram h;
  int64_t n = 0;
  for (const Trajectory& t : ds.trajectories) {
    if (t.hour != hour) continue;
    h[static_cast<int>(t.cells.size())] += 1;
    ++n;
  }
  for (auto& [len, f] : h) f /= static_cast<double>(n);
  return h;
}

double JensenShannon(const LengthHistogram& p, const LengthHistogram& q) {
  std::set<int> support;
  for (const auto& [k, _] : p) support.insert(k);
  for (const auto& [k, _] : q) support.insert(k);
  double js = 0;
  for (int k : support) {
    const auto ip = p.find(k);
    const auto iq = q.find(k);
    const double pk = ip == p.end() ? 0 : ip->second;
    const double qk = iq == q.end() ? 0 : iq->second;
    const double m = 0.5 * (pk + qk);
    js += 0.5 * KlTerm(pk, m) + 0.5 * KlTerm(qk, m);
  }
  return std::clamp(js, 0.0, 1.0);
}

std::optional<double> TripLengthJsd(const Dataset& a, const Dataset& b,
                                    TimeSlot hour) {
  const LengthHistogram p = TripLengthHistogram(a, hour);
  const LengthHistogram q = TripLengthHistogram(b, hour);
  if (p.empty() || q.empty()) return std::nullopt;
  return JensenShannon(p, q);
}

std::map<Pattern, int64_t> CountPatterns(const Dataset& ds) {
  std::map<Pattern, int64_t> counts;
  std::set<Pattern> seen;
  for (const Trajectory& t : ds.trajectories) {
    seen.clear();
    const int n = static_cast<int>(t.cells.size());
    for (int len = kMinPatternLength; len <= std::min(n, kMaxPatternLength);
         ++len) {
      for (int start = 0; start + len <= n; ++start) {
        Pattern p(len);
        for (int i = 0; i < len; ++i) p[i] = t.cells[start + i].index;
        seen.insert(std::move(p));
      }
    }
    for (const Pattern& p : seen) ++counts[p];
  }
  return counts;
}

std::vector<Pattern> TopPatterns(const std::map<Pattern, int64_t>& counts,
                                 int k) {
  std::vector<std::pair<int64_t, const Pattern*>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [p, c] : counts) ranked.push_back({c, &p});
  const size_t keep = std::min(ranked.size(), static_cast<size_t>(std::max(k, 0)));
  // The map is already in lexicographic order, so a stable sort by count
  // keeps the lexicographic tie order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  std::vector<Pattern> top;
  top.reserve(keep);
  for (size_t i = 0; i < keep; ++i) top.push_back(*ranked[i].second);
  return top;
}

std::optional<PatternTpr> FrequentPatternTpr(const Dataset& a,
                                             const Dataset& b, int k) {
  if (k < 1) return std::nullopt;
  const std::map<Pattern, int64_t> ca = CountPatterns(a);
  const std::map<Pattern, int64_t> cb = CountPatterns(b);
  const int k_used = static_cast<int>(std::min<size_t>(
      static_cast<size_t>(k), std::min(ca.size(), cb.size())));
  if (k_used == 0) return std::nullopt;
  const std::vector<Pattern> ta = TopPatterns(ca, k_used);
  const std::vector<Pattern> tb = TopPatterns(cb, k_used);
  const std::set<Pattern> sa(ta.begin(), ta.end());
  int hits = 0;
  for (const Pattern& p : tb) hits += sa.count(p) > 0;
  return PatternTpr{static_cast<double>(hits) / k_used, k_used};
}

PairDistribution BuildPairDistribution(
    const std::vector<const Trajectory*>& trips) {
  std::map<std::pair<int32_t, int32_t>, int64_t> counts;
  for (const Trajectory* t : trips) {
    ++counts[{t->source().index, t->destination().index}];
  }
  PairDistribution d;
  for (const auto& [pair, c] : counts) {
    d.support.push_back({CellId{pair.first}, CellId{pair.second}});
    d.counts.push_back(c);
    d.total += c;
  }
  return d;
}

absl::StatusOr<double> PairEmd(const PairDistribution& a,
                               const PairDistribution& b,
                               const GridSpec& grid) {
  if (a.total <= 0 || b.total <= 0) {
    return absl::InvalidArgumentError("EMD needs two non-empty distributions");
  }
  const int m = static_cast<int>(a.support.size());
  const int n = static_cast<int>(b.support.size());
  Eigen::MatrixXd cost(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      cost(i, j) =
          CellDistanceMeters(a.support[i].first, b.support[j].first, grid) +
          CellDistanceMeters(a.support[i].second, b.support[j].second, grid);
    }
  }
  // Scale both margins to the common total a.total * b.total.
  std::vector<int64_t> supply(m), demand(n);
  for (int i = 0; i < m; ++i) supply[i] = a.counts[i] * b.total;
  for (int j = 0; j < n; ++j) demand[j] = b.counts[j] * a.total;
  absl::StatusOr<TransportSolution> sol = SolveTransport(supply, demand, cost);
  if (!sol.ok()) {
    return absl::InternalError(
        absl::StrCat("EMD transport failed: ", sol.status().message()));
  }
  return sol->cost /
         (static_cast<double>(a.total) * static_cast<double>(b.total));
}

std::vector<const Trajectory*> SampleHour(const Dataset& ds, TimeSlot hour,
                                          uint64_t seed, int cap) {
  std::vector<const Trajectory*> trips;
  for (const Trajectory& t : ds.trajectories) {
    if (t.hour == hour) trips.push_back(&t);
  }
  if (cap < 0 || trips.size() <= static_cast<size_t>(cap)) return trips;
  Rng rng = DeriveRng(seed, RngStream::kEvalSample,
                      static_cast<uint64_t>(hour.hour));
  // Partial Fisher-Yates.
  for (int i = 0; i < cap; ++i) {
    std::uniform_int_distribution<size_t> pick(i, trips.size() - 1);
    std::swap(trips[i], trips[pick(rng)]);
  }
  trips.resize(cap);
  return trips;
}

absl::StatusOr<std::optional<double>> SourceDestEmd(
    const Dataset& a, const Dataset& b, TimeSlot hour, const GridSpec& grid,
    uint64_t seed, int cap) {
  const std::vector<const Trajectory*> sa = SampleHour(a, hour, seed, cap);
  const std::vector<const Trajectory*> sb = SampleHour(b, hour, seed, cap);
  if (sa.empty() || sb.empty()) return std::optional<double>();
  absl::StatusOr<double> emd = PairEmd(BuildPairDistribution(sa),
                                       BuildPairDistribution(sb), grid);
  if (!emd.ok()) return emd.status();
  return std::optional<double>(*emd);
}

absl::StatusOr<std::vector<MetricLine>> EvaluateAll(
    const Dataset& original, const Dataset& synthetic, const GridSpec& grid,
    const EvaluationOptions& options) {
  std::vector<MetricLine> lines;
  for (int h = 0; h < kHoursPerDay; ++h) {
    lines.push_back({"jsd", h, std::nullopt,
                     TripLengthJsd(original, synthetic, TimeSlot{h}),
                     std::nullopt});
  }
  for (int k : options.k_values) {
    const std::optional<PatternTpr> tpr =
        FrequentPatternTpr(original, synthetic, k);
    MetricLine line{"tpr", std::nullopt, k, std::nullopt, std::nullopt};
    if (tpr) {
      line.value = tpr->value;
      line.k_used = tpr->k_used;
    }
    lines.push_back(line);
  }
  for (int h = 0; h < kHoursPerDay; ++h) {
    absl::StatusOr<std::optional<double>> emd = SourceDestEmd(
        original, synthetic, TimeSlot{h}, grid, options.seed, options.emd_cap);
    if (!emd.ok()) return emd.status();
    lines.push_back({"emd", h, std::nullopt, *emd, std::nullopt});
  }
  return lines;
}

std::string FormatMetricLine(const MetricLine& line) {
  std::string out = absl::StrCat(
      "metric=", line.metric, " hour=",
      line.hour ? absl::StrCat(*line.hour) : std::string("-"),
      " k=", line.k ? absl::StrCat(*line.k) : std::string("-"), " value=",
      line.value ? absl::StrFormat("%.6f", *line.value) : std::string("absent"));
  if (line.k_used) absl::StrAppend(&out, " k_used=", *line.k_used);
  return out;
}

std::string FormatReport(const std::vector<MetricLine>& lines) {
  std::string out;
  for (const MetricLine& l : lines) absl::StrAppend(&out, FormatMetricLine(l), "\n");
  return out;
}

}  // namespace ptraj
