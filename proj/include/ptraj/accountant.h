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

// Moments accountant for the Poisson-subsampled Gaussian mechanism.
//
// For one step with sampling rate q and noise multiplier sigma, the privacy
// loss is analysed on the pair
//   mu0 = N(0, sigma^2),   mu = (1 - q) N(0, sigma^2) + q N(1, sigma^2)
// and the log moment of order lambda is
//   alpha(lambda) = log max(E_mu0[(mu0/mu)^lambda], E_mu[(mu/mu0)^lambda]).
// Log moments add up over steps; (epsilon, delta) follows from the tail bound
//   epsilon = min_lambda (alpha(lambda) - log delta) / lambda.

#ifndef PTRAJ_ACCOUNTANT_H_
#define PTRAJ_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace ptraj {

inline constexpr int kDefaultMaxLambda = 64;

// Log moment of one subsampled Gaussian step, by adaptive quadrature.
// q == 0 gives 0; sigma == 0 with q > 0 gives +infinity. Numeric error
// (Internal) if the integral does not converge.
absl::StatusOr<double> StepLogMoment(double q, double sigma, int lambda);

// StepLogMoment for every order in `lambdas`.
absl::StatusOr<std::vector<double>> StepLogMoments(
    double q, double sigma, std::span<const int> lambdas);

struct PrivacySpend {
  double epsilon = 0;  // +infinity for a non-private ledger
  double delta = 0;
  int lambda = 0;  // order attaining the minimum
};

// One homogeneous training phase, kept for reporting.
struct PrivacyPhase {
  std::string name;
  double q = 0;
  double sigma = 0;
  int64_t steps = 0;
};

class PrivacyLedger {
 public:
  explicit PrivacyLedger(int max_lambda = kDefaultMaxLambda);

  // Adds `steps` steps at (q, sigma) to every order.
  absl::Status Compose(double q, double sigma, int64_t steps,
                       absl::string_view phase_name = "");
  // Adds `steps` steps whose per-step log moments were precomputed on this
  // ledger's lambda grid. Consecutive calls for one phase name extend that
  // phase.
  absl::Status AddSteps(std::span<const double> per_step_alpha, double q,
                        double sigma, int64_t steps,
                        absl::string_view phase_name);
  // Per-order sum of two ledgers built on the same lambda grid.
  absl::Status Merge(const PrivacyLedger& other);

  PrivacySpend EpsilonForDelta(double delta) const;

  const std::vector<int>& lambdas() const { return lambdas_; }
  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<PrivacyPhase>& phases() const { return phases_; }
  int64_t steps() const;
  bool non_private() const;

  // key=value text, one line per entry.
  std::string Serialize(double delta) const;

 private:
  std::vector<int> lambdas_;
  std::vector<double> alpha_;
  std::vector<PrivacyPhase> phases_;
};

// round(dataset_size / batch_size), at least 1.
int64_t StepsPerEpoch(int64_t dataset_size, int64_t batch_size);

// Accountant query: epsilon after `epochs` epochs of Poisson-subsampled
// training at q = batch/dataset.
absl::StatusOr<PrivacySpend> ComputeEpsilon(int64_t dataset_size,
                                            int64_t batch_size, double sigma,
                                            int64_t epochs, double delta);

}  // namespace ptraj

#endif  // PTRAJ_ACCOUNTANT_H_
