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

// DP-SGD with trajectory-level sampling.
//
// Every update: sample a batch, compute each example's gradient, clip it to
// L2 norm C, sum in example order, add N(0, (sigma C)^2 I) and step by
//   -lr * (sum + noise) / B
// where B is the expected batch size. Noise for step k is drawn from an
// engine derived from (seed, k) only.

#ifndef PTRAJ_DP_SGD_H_
#define PTRAJ_DP_SGD_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ptraj/accountant.h"
#include "ptraj/rng.h"

namespace ptraj {

struct DpSgdConfig {
  double clip_norm = 1.0;
  double noise_multiplier = 1.3;
  int64_t batch_size = 200;
  double learning_rate = 0.2;
  int64_t epochs = 15;
  uint64_t seed = 0;
  // Worker threads for per-example gradients. Results do not depend on it.
  int threads = 1;
};

absl::Status ValidateDpSgdConfig(const DpSgdConfig& cfg, int64_t dataset_size);

// Scales g onto the L2 ball of radius C if it lies outside. Returns the norm
// before clipping. The result's computed norm never exceeds C.
double ClipToNorm(std::span<double> g, double clip_norm);

// Parameter delta for one update from the sum of clipped gradients.
std::vector<double> NoisyDelta(std::span<const double> clipped_sum,
                               const DpSgdConfig& cfg, Rng& noise_rng);

// Poisson subsampling: each of n records independently with probability q.
// Returns record ids in increasing order.
std::vector<int64_t> SampleBatchPoisson(int64_t n, double q, Rng& rng);

struct TwoStageDraw {
  int64_t trajectory = 0;
  int64_t sample = 0;  // index within the trajectory's samples
};

// B draws of (uniform trajectory, then uniform sample within it).
// `samples_per_trajectory[i]` must be >= 1.
std::vector<TwoStageDraw> SampleBatchTwoStage(
    std::span<const int64_t> samples_per_trajectory, int64_t batch_size,
    Rng& rng);

// Loss of one example and its gradient, added into `grad` (zeroed by the
// caller). `rng` is a per-example engine for models that need noise.
using ExampleLossFn = std::function<absl::StatusOr<double>(
    std::span<const double> params, int64_t example, Rng& rng,
    std::span<double> grad)>;

// Example ids for one update.
using BatchSamplerFn = std::function<std::vector<int64_t>(Rng& rng)>;

struct TrainingReport {
  int64_t steps = 0;
  int64_t examples = 0;
  int64_t clip_violations = 0;   // clipped norms above C; expected 0
  double max_clipped_norm = 0;
  std::vector<double> epoch_mean_loss;
};

struct TrainingJob {
  DpSgdConfig config;
  int64_t dataset_size = 0;  // |D|, number of trajectories
  std::string phase_name;
  BatchSamplerFn sampler;
  ExampleLossFn loss;
  // Updated once per step when set.
  PrivacyLedger* ledger = nullptr;
  // Called after every epoch with the epoch index and mean loss.
  std::function<void(int64_t, double)> on_epoch;
};

absl::StatusOr<TrainingReport> RunDpSgd(const TrainingJob& job,
                                        std::vector<double>& params);

}  // namespace ptraj

#endif  // PTRAJ_DP_SGD_H_
