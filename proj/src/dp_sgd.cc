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

#include "ptraj/dp_sgd.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "ptraj/nn.h"

namespace ptraj {
namespace {

// Per-example gradients are summed within a fixed number of chunks and the
// chunk partials in chunk order, so the floating-point result does not
// depend on the number of worker threads.
constexpr int kGradientChunks = 8;

struct ChunkResult {
  std::vector<double> sum;
  double loss = 0;
  int64_t violations = 0;
  double max_norm = 0;
  absl::Status status;
};

void RunChunk(const TrainingJob& job, std::span<const double> params,
              std::span<const int64_t> examples, size_t first_position,
              int64_t step, ChunkResult& out) {
  const double clip = job.config.clip_norm;
  std::vector<double> grad(params.size());
  out.sum.assign(params.size(), 0.0);
  for (size_t k = 0; k < examples.size(); ++k) {
    std::fill(grad.begin(), grad.end(), 0.0);
    Rng example_rng =
        DeriveRng(job.config.seed, RngStream::kVaeNoise,
                  (static_cast<uint64_t>(step) << 24) + first_position + k);
    absl::StatusOr<double> loss =
        job.loss(params, examples[k], example_rng, grad);
    if (!loss.ok()) {
      out.status = loss.status();
      return;
    }
    if (!std::isfinite(*loss)) {
      out.status = absl::InternalError(absl::StrFormat(
          "numeric: non-finite loss %g for example %d at step %d", *loss,
          examples[k], step));
      return;
    }
    out.loss += *loss;
    ClipToNorm(grad, clip);
    const double norm = nn::L2Norm(grad);
    if (norm > clip) ++out.violations;
    out.max_norm = std::max(out.max_norm, norm);
    for (size_t i = 0; i < grad.size(); ++i) out.sum[i] += grad[i];
  }
}

}  // namespace

absl::Status ValidateDpSgdConfig(const DpSgdConfig& cfg,
                                 int64_t dataset_size) {
  if (!(cfg.clip_norm > 0) || !std::isfinite(cfg.clip_norm)) {
    return absl::InvalidArgumentError("clip_norm must be positive");
  }
  if (!(cfg.noise_multiplier >= 0) || !std::isfinite(cfg.noise_multiplier)) {
    return absl::InvalidArgumentError("noise_multiplier must be >= 0");
  }
  if (!(cfg.learning_rate > 0) || !std::isfinite(cfg.learning_rate)) {
    return absl::InvalidArgumentError("learning_rate must be positive");
  }
  if (cfg.epochs <= 0) {
    return absl::InvalidArgumentError("epochs must be positive");
  }
  if (cfg.batch_size <= 0 || cfg.batch_size > dataset_size) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "batch_size %d must lie in [1, |D| = %d]", cfg.batch_size,
        dataset_size));
  }
  return absl::OkStatus();
}

double ClipToNorm(std::span<double> g, double clip_norm) {
  const double norm = nn::L2Norm(g);
  if (norm <= clip_norm) return norm;
  double scale = clip_norm / norm;
  for (double& x : g) x *= scale;
  // Rounding can leave the rescaled norm a few ulps above C.
  while (nn::L2Norm(g) > clip_norm) {
    scale = std::nextafter(1.0, 0.0);
    for (double& x : g) x *= scale;
  }
  return norm;
}

std::vector<double> NoisyDelta(std::span<const double> clipped_sum,
                               const DpSgdConfig& cfg, Rng& noise_rng) {
  const double stddev = cfg.noise_multiplier * cfg.clip_norm;
  const double scale =
      -cfg.learning_rate / static_cast<double>(cfg.batch_size);
  std::vector<double> delta(clipped_sum.size());
  if (stddev > 0) {
    std::normal_distribution<double> noise(0.0, stddev);
    for (size_t i = 0; i < delta.size(); ++i) {
      delta[i] = scale * (clipped_sum[i] + noise(noise_rng));
    }
  } else {
    for (size_t i = 0; i < delta.size(); ++i) {
      delta[i] = scale * clipped_sum[i];
    }
  }
  return delta;
}

std::vector<int64_t> SampleBatchPoisson(int64_t n, double q, Rng& rng) {
  std::vector<int64_t> batch;
  if (q >= 1.0) {
    batch.resize(n);
    for (int64_t i = 0; i < n; ++i) batch[i] = i;
    return batch;
  }
  std::bernoulli_distribution include(q);
  for (int64_t i = 0; i < n; ++i) {
    if (include(rng)) batch.push_back(i);
  }
  return batch;
}

std::vector<TwoStageDraw> SampleBatchTwoStage(
    std::span<const int64_t> samples_per_trajectory, int64_t batch_size,
    Rng& rng) {
  std::vector<TwoStageDraw> draws;
  draws.reserve(batch_size);
  std::uniform_int_distribution<int64_t> pick_traj(
      0, static_cast<int64_t>(samples_per_trajectory.size()) - 1);
  for (int64_t b = 0; b < batch_size; ++b) {
    const int64_t t = pick_traj(rng);
    std::uniform_int_distribution<int64_t> pick_sample(
        0, samples_per_trajectory[t] - 1);
    draws.push_back({t, pick_sample(rng)});
  }
  return draws;
}

absl::StatusOr<TrainingReport> RunDpSgd(const TrainingJob& job,
                                        std::vector<double>& params) {
  const DpSgdConfig& cfg = job.config;
  absl::Status valid = ValidateDpSgdConfig(cfg, job.dataset_size);
  if (!valid.ok()) return valid;
  if (!job.sampler || !job.loss) {
    return absl::InvalidArgumentError("training job lacks sampler or loss");
  }

  const double q = static_cast<double>(cfg.batch_size) /
                   static_cast<double>(job.dataset_size);
  std::vector<double> per_step_alpha;
  if (job.ledger != nullptr) {
    absl::StatusOr<std::vector<double>> a =
        StepLogMoments(q, cfg.noise_multiplier, job.ledger->lambdas());
    if (!a.ok()) return a.status();
    per_step_alpha = *std::move(a);
  }

  const int64_t steps_per_epoch =
      StepsPerEpoch(job.dataset_size, cfg.batch_size);
  const int threads = std::max(1, std::min(cfg.threads, kGradientChunks));
  TrainingReport report;
  std::vector<ChunkResult> chunks(kGradientChunks);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0;
    int64_t epoch_examples = 0;
    for (int64_t s = 0; s < steps_per_epoch; ++s) {
      const int64_t step = report.steps;
      Rng batch_rng = DeriveRng(cfg.seed, RngStream::kBatch, step);
      const std::vector<int64_t> batch = job.sampler(batch_rng);

      // Contiguous, fixed chunk boundaries over the batch.
      const size_t n = batch.size();
      auto chunk_begin = [&](int c) { return n * c / kGradientChunks; };
      auto work = [&](int worker) {
        for (int c = worker; c < kGradientChunks; c += threads) {
          const size_t lo = chunk_begin(c), hi = chunk_begin(c + 1);
          chunks[c] = ChunkResult{};
          RunChunk(job, params,
                   std::span<const int64_t>(batch).subspan(lo, hi - lo), lo,
                   step, chunks[c]);
        }
      };
      if (threads == 1) {
        work(0);
      } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
      }

      std::vector<double> sum(params.size(), 0.0);
      for (const ChunkResult& c : chunks) {
        if (!c.status.ok()) return c.status;
        for (size_t i = 0; i < sum.size(); ++i) sum[i] += c.sum[i];
        epoch_loss += c.loss;
        report.clip_violations += c.violations;
        report.max_clipped_norm = std::max(report.max_clipped_norm, c.max_norm);
      }
      epoch_examples += static_cast<int64_t>(n);
      report.examples += static_cast<int64_t>(n);

      Rng noise_rng = DeriveRng(cfg.seed, RngStream::kNoise, step);
      const std::vector<double> delta = NoisyDelta(sum, cfg, noise_rng);
      for (size_t i = 0; i < params.size(); ++i) params[i] += delta[i];
      ++report.steps;

      if (job.ledger != nullptr) {
        absl::Status st = job.ledger->AddSteps(
            per_step_alpha, q, cfg.noise_multiplier, 1, job.phase_name);
        if (!st.ok()) return st;
      }
    }
    const double mean =
        epoch_examples > 0 ? epoch_loss / static_cast<double>(epoch_examples)
                           : 0.0;
    report.epoch_mean_loss.push_back(mean);
    if (job.on_epoch) job.on_epoch(epoch, mean);
  }
  return report;
}

}  // namespace ptraj
