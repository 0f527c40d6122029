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

// Acceptance runner. Prints one line per criterion and exits nonzero when
// any criterion fails. Criterion 9 needs the raw cabspotting traces in
// $PTRAJ_CABSPOTTING_DIR and is skipped without them.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_format.h"
#include "oracles.h"
#include "ptraj/accountant.h"
#include "ptraj/commands.h"
#include "ptraj/config.h"
#include "ptraj/dataset.h"
#include "ptraj/metrics.h"
#include "ptraj/ti_model.h"
#include "ptraj/tpg_model.h"
#include "ptraj/trace_generator.h"
#include "test_util.h"
#include "toy_corpus.h"

namespace ptraj {
namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome Check(bool ok, std::string detail) {
  return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)};
}

constexpr int64_t kSfTrips = 121622;

Outcome AccountantRanges() {
  const auto a = ComputeEpsilon(kSfTrips, 200, 1.3, 30, 1.0 / kSfTrips);
  const auto b = ComputeEpsilon(kSfTrips, 200, 0.9, 30, 1.0 / kSfTrips);
  if (!a.ok() || !b.ok()) return {Verdict::kFail, "accountant error"};
  return Check(a->epsilon >= 0.8 && a->epsilon <= 1.2 && b->epsilon >= 1.7 &&
                   b->epsilon <= 2.3,
               absl::StrFormat("eps(1.3)=%.4f eps(0.9)=%.4f steps=%d",
                               a->epsilon, b->epsilon,
                               30 * StepsPerEpoch(kSfTrips, 200)));
}

Outcome GradientAgreement() {
  double worst = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    worst = std::max(worst, testing_util::TiGradientError(seed));
    worst = std::max(worst, testing_util::TpgGradientError(seed));
  }
  return Check(worst <= 1e-4,
               absl::StrFormat("200 instances, worst rel err %.3g", worst));
}

Outcome PathSearchOracle() {
  std::mt19937_64 rng(20260);
  int mismatches = 0, reachable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    ExplicitGraph g(n);
    const double density = std::uniform_real_distribution<double>(0.2, 0.7)(rng);
    std::bernoulli_distribution edge(density);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b && edge(rng)) g.AddProbabilityEdge(a, b, p(rng));
      }
    }
    const int src = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int dst = std::uniform_int_distribution<int>(0, n - 2)(rng);
    if (dst >= src) ++dst;
    const auto path = MostProbablePath(g, src, dst);
    const std::optional<double> best = oracle::MinSimplePathWeight(g, src, dst);
    if (path.ok() != best.has_value()) {
      ++mismatches;
      continue;
    }
    if (!best) continue;
    ++reachable;
    if (path->weight != *best || oracle::PathWeight(g, path->nodes) != *best) {
      ++mismatches;
    }
  }
  return Check(mismatches == 0,
               absl::StrFormat("1000 graphs, %d reachable, %d mismatches",
                               reachable, mismatches));
}

// Random pair distribution whose counts sum to `total` over at most five
// support points.
PairDistribution RandomPairs(std::mt19937_64& rng, int total, int cells) {
  std::uniform_int_distribution<int> cell(0, cells - 1);
  std::map<std::pair<CellId, CellId>, int64_t> mass;
  const int points = std::uniform_int_distribution<int>(1, std::min(total, 5))(rng);
  std::vector<std::pair<CellId, CellId>> support;
  while (static_cast<int>(support.size()) < points) {
    std::pair<CellId, CellId> s{CellId{cell(rng)}, CellId{cell(rng)}};
    if (mass.emplace(s, 1).second) support.push_back(s);
  }
  for (int k = points; k < total; ++k) {
    ++mass[support[rng() % support.size()]];
  }
  PairDistribution d;
  for (const auto& [s, c] : mass) {
    d.support.push_back(s);
    d.counts.push_back(c);
    d.total += c;
  }
  return d;
}

Outcome EmdOracle() {
  const GridSpec grid = *GridSpec::ForDimensions(12, 12, 250);
  std::mt19937_64 rng(404);
  // Total pairs with a small common multiple keep enumeration tractable.
  const std::vector<std::pair<int, int>> totals = {
      {1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}, {6, 6}, {2, 4}, {4, 8},
      {8, 8}, {2, 6}, {3, 6}, {1, 5}, {7, 7}, {4, 2}, {6, 3}, {8, 4}};
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto [ta, tb] = totals[trial % totals.size()];
    const PairDistribution a = RandomPairs(rng, ta, grid.universe_size());
    const PairDistribution b = RandomPairs(rng, tb, grid.universe_size());
    const auto exact = PairEmd(a, b, grid);
    if (!exact.ok()) return {Verdict::kFail, std::string(exact.status().message())};
    const int64_t common = std::lcm(a.total, b.total);
    std::vector<int64_t> supply, demand;
    for (int64_t c : a.counts) supply.push_back(c * (common / a.total));
    for (int64_t c : b.counts) demand.push_back(c * (common / b.total));
    Eigen::MatrixXd cost(a.support.size(), b.support.size());
    for (size_t i = 0; i < a.support.size(); ++i) {
      for (size_t j = 0; j < b.support.size(); ++j) {
        cost(i, j) =
            CellDistanceMeters(a.support[i].first, b.support[j].first, grid) +
            CellDistanceMeters(a.support[i].second, b.support[j].second, grid);
      }
    }
    const double brute =
        oracle::BruteForceTransport(supply, demand, cost) / common;
    const double rel = std::abs(*exact - brute) / std::max(brute, 1e-12);
    if (brute == 0 && *exact == 0) continue;
    worst = std::max(worst, rel);
  }
  return Check(worst <= 1e-6,
               absl::StrFormat("200 instances, worst rel err %.3g", worst));
}

Outcome DpMechanics() {
  const GridSpec grid = toy::Grid();
  const Dataset corpus = toy::MakeCorpus(600, 5);
  const OccupiedCellIndex cells = corpus.OccupiedCells();

  // A noisy run of both models: every clipped norm must stay within C.
  PrivacyLedger ledger;
  TiModel ti(cells, 32, 8);
  ti.Initialize(1);
  const auto ti_report = TrainTi(ti, corpus, {1.0, 1.3, 60, 0.2, 5, 1, 1}, &ledger);
  TpgModel tpg(cells, NeighborhoodSpec{}, 16, 32);
  tpg.Initialize(2);
  const auto tpg_result =
      TrainTpg(tpg, corpus, grid, {3.0, 1.3, 60, 0.1, 5, 2, 1}, &ledger);
  if (!ti_report.ok() || !tpg_result.ok()) {
    return {Verdict::kFail, "training error"};
  }
  const int64_t violations =
      ti_report->clip_violations + tpg_result->report.clip_violations;
  const int64_t examples = ti_report->examples + tpg_result->report.examples;

  // Sigma 0 with the whole dataset in every batch is deterministic.
  auto full_batch = [&](int threads) {
    TiModel m(cells, 32, 8);
    m.Initialize(9);
    DpSgdConfig cfg{1.0, 0.0, static_cast<int64_t>(corpus.size()), 0.2, 3, 9,
                    threads};
    (void)TrainTi(m, corpus, cfg, nullptr);
    return std::vector<double>(m.params().begin(), m.params().end());
  };
  const std::vector<double> a = full_batch(1), b = full_batch(1),
                            c = full_batch(3);
  const bool identical =
      a.size() == b.size() && a.size() == c.size() &&
      std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0 &&
      std::memcmp(a.data(), c.data(), a.size() * sizeof(double)) == 0;
  return Check(violations == 0 && identical,
               absl::StrFormat("%d clipped examples, %d violations, "
                               "sigma=0 q=1 runs %s",
                               examples, violations,
                               identical ? "bit-identical" : "differ"));
}

std::string PipelineSummary(const toy::PipelineResult& r) {
  auto show = [](const std::optional<double>& v) {
    return v ? absl::StrFormat("%.4f", *v) : std::string("absent");
  };
  return absl::StrFormat(
      "jsd=%s/%s emd_m=%s/%s tpr3=%s eps=%s tpg_acc=%.3f",
      show(r.jsd[0]), show(r.jsd[1]), show(r.emd_m[0]), show(r.emd_m[1]),
      r.tpr_top3 ? absl::StrFormat("%.3f", r.tpr_top3->value) : "absent",
      std::isinf(r.spend.epsilon) ? std::string("inf")
                                  : absl::StrFormat("%.3f", r.spend.epsilon),
      r.tpg_accuracy);
}

Outcome ToyPipeline(double sigma) {
  const auto r = toy::RunPipeline(toy::DefaultPipeline(sigma));
  if (!r.ok()) return {Verdict::kFail, std::string(r.status().message())};
  bool ok = true;
  for (const auto& j : r->jsd) {
    ok = ok && j.has_value() && *j < (sigma == 0 ? 0.2 : 0.5);
  }
  if (sigma == 0) {
    for (const auto& e : r->emd_m) {
      ok = ok && e.has_value() && *e < 2 * toy::kCellMeters;
    }
    ok = ok && r->tpr_top3.has_value() && r->tpr_top3->value == 1.0;
  } else {
    ok = ok && std::isfinite(r->spend.epsilon);
  }
  return Check(ok, PipelineSummary(*r));
}

Outcome MetricIdentities() {
  const GridSpec grid = toy::Grid();
  const Dataset d = toy::MakeCorpus(3000, 77);
  EvaluationOptions options;
  const auto lines = EvaluateAll(d, d, grid, options);
  if (!lines.ok()) return {Verdict::kFail, std::string(lines.status().message())};
  int checked = 0, bad = 0;
  for (const MetricLine& l : *lines) {
    if (!l.value) continue;
    ++checked;
    const double want = l.metric == "tpr" ? 1.0 : 0.0;
    if (*l.value != want) ++bad;
  }
  return Check(bad == 0 && checked > 0,
               absl::StrFormat("%d present values, %d off", checked, bad));
}

Outcome CabspottingAccuracy() {
  const char* dir = std::getenv("PTRAJ_CABSPOTTING_DIR");
  if (dir == nullptr || *dir == '\0') {
    return {Verdict::kSkip, "PTRAJ_CABSPOTTING_DIR not set"};
  }
  RunConfig config;
  config.raw_dir = dir;
  config.out_dir = testing_util::FreshDir("acceptance_cabspotting");
  config.tpg.noise_multiplier = 0.9;
  std::ostringstream out, log;
  const absl::Status pre = RunPreprocess(config, {&out, &log});
  if (!pre.ok()) return {Verdict::kFail, std::string(pre.message())};
  const auto ds = ReadDatasetFile(config.DatasetPath());
  const auto grid = config.Grid();
  if (!ds.ok() || !grid.ok()) return {Verdict::kFail, "cannot reload dataset"};
  TpgModel tpg(ds->OccupiedCells(), config.Neighborhood(),
               config.tpg_embedding, config.tpg_hidden);
  DpSgdConfig cfg = config.tpg;
  cfg.seed = TpgSeed(config.seed);
  tpg.Initialize(cfg.seed);
  PrivacyLedger ledger;
  const auto r = TrainTpg(tpg, *ds, *grid, cfg, &ledger);
  if (!r.ok()) return {Verdict::kFail, std::string(r.status().message())};
  const double acc = r->diagnostics.accuracy * 100;
  const PrivacySpend spend =
      ledger.EpsilonForDelta(1.0 / static_cast<double>(ds->size()));
  return Check(std::abs(acc - 75.28) <= 10.0,
               absl::StrFormat("|D|=%d accuracy=%.2f%% eps=%.3f", ds->size(),
                               acc, spend.epsilon));
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace ptraj

int main() {
  using ptraj::Verdict;
  const std::vector<ptraj::Criterion> criteria = {
      {1, "accountant", 10, ptraj::AccountantRanges},
      {2, "gradients", 60, ptraj::GradientAgreement},
      {3, "path-search", 60, ptraj::PathSearchOracle},
      {4, "emd", 60, ptraj::EmdOracle},
      {5, "dp-mechanics", 600, ptraj::DpMechanics},
      {6, "toy-pipeline", 600, [] { return ptraj::ToyPipeline(0.0); }},
      {7, "toy-pipeline-private", 600, [] { return ptraj::ToyPipeline(1.3); }},
      {8, "metric-identities", 60, ptraj::MetricIdentities},
      {9, "cabspotting-tpg", 1e9, ptraj::CabspottingAccuracy},
  };
  int failures = 0;
  for (const ptraj::Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    ptraj::Outcome o = c.run();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (o.verdict == Verdict::kPass && secs > c.budget_s) {
      o.verdict = Verdict::kFail;
      o.detail += absl::StrFormat(", over %.0fs budget", c.budget_s);
    }
    const char* tag = o.verdict == Verdict::kPass   ? "PASS"
                      : o.verdict == Verdict::kSkip ? "SKIP"
                                                    : "FAIL";
    if (o.verdict == Verdict::kFail) ++failures;
    std::cout << absl::StrFormat("C%d %s %s: %s (%.1fs)\n", c.id, tag, c.name,
                                 o.detail, secs)
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
