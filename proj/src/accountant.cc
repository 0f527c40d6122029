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

#include "ptraj/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"
#include "boost/math/quadrature/gauss_kronrod.hpp"

namespace ptraj {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quadrature settings. The integrand is split into segments about half a
// standard deviation wide before adaptive refinement, so a narrow peak
// cannot fall between nodes.
constexpr int kMinSegments = 64;
constexpr int kMaxSegments = 20000;
constexpr int kScanPoints = 4096;
constexpr unsigned kMaxDepth = 15;
// Target error per segment, relative to the whole integral.
constexpr double kSegmentTolerance = 1e-13;
constexpr double kAcceptedRelativeError = 1e-9;
constexpr double kRoundoffMargin = 1e3;

double LogAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log(mu(z) / mu0(z)).
double LogRatio(double z, double q, double sigma) {
  const double shift = (2.0 * z - 1.0) / (2.0 * sigma * sigma);
  if (q >= 1.0) return shift;
  return LogAddExp(std::log1p(-q), std::log(q) + shift);
}

double LogGaussianDensity(double z, double sigma) {
  return -z * z / (2.0 * sigma * sigma) -
         std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
}

// log of integral_R exp(log_f(z)) dz, where the bulk of the mass lies in
// [lo, hi].
// `log_scale` bounds the magnitude of the terms summed inside log_f. Those
// terms nearly cancel near the peak, so integrand values carry a relative
// round-off of about log_scale * machine epsilon, and no error estimate can
// go below that.
template <typename LogF>
absl::StatusOr<double> LogIntegral(LogF log_f, double lo, double hi,
                                   double sigma, double log_scale) {
  const double noise_floor =
      kRoundoffMargin * std::numeric_limits<double>::epsilon() * log_scale;
  const double accepted = std::max(kAcceptedRelativeError, noise_floor);
  const double segment_tolerance = std::max(kSegmentTolerance, noise_floor);
  const int segments = static_cast<int>(std::clamp<double>(
      std::ceil((hi - lo) / (0.5 * sigma)), kMinSegments, kMaxSegments));
  double peak = -kInf;
  for (int i = 0; i <= kScanPoints; ++i) {
    const double z = lo + (hi - lo) * i / kScanPoints;
    peak = std::max(peak, log_f(z));
  }
  if (!std::isfinite(peak)) {
    return absl::InternalError("numeric: non-finite log-moment integrand");
  }
  auto scaled = [&](double z) { return std::exp(log_f(z) - peak); };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double width = (hi - lo) / segments;
  auto segment = [&](int s) {
    const double a = lo + s * width;
    return std::pair(a, s + 1 == segments ? hi : a + width);
  };
  // A single-rule pass gives the scale of the integral so each segment can
  // get a tolerance relative to the whole rather than to itself; otherwise
  // the negligible tails would refine to the maximum depth.
  std::vector<double> rough(segments);
  double rough_total = 0;
  for (int s = 0; s < segments; ++s) {
    const auto [a, b] = segment(s);
    rough[s] = Quadrature::integrate(scaled, a, b, 0);
    rough_total += rough[s];
  }
  double total = 0;
  double total_error = 0;
  for (int s = 0; s < segments; ++s) {
    const auto [a, b] = segment(s);
    double err = 0;
    const double tol =
        rough[s] > 0 ? std::max(segment_tolerance,
                                segment_tolerance * rough_total / rough[s])
                     : 1.0;
    total += Quadrature::integrate(scaled, a, b, kMaxDepth, tol, &err);
    total_error += err;
  }
  if (!(total > 0) || !std::isfinite(total) ||
      total_error > accepted * total) {
    return absl::InternalError(absl::StrFormat(
        "numeric: log-moment quadrature did not converge (value %g, error "
        "estimate %g)",
        total, total_error));
  }
  return peak + std::log(total);
}

}  // namespace

absl::StatusOr<double> StepLogMoment(double q, double sigma, int lambda) {
  if (!(q >= 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sampling rate %g outside [0, 1]", q));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise multiplier %g must be >= 0", sigma));
  }
  if (lambda < 1) {
    return absl::InvalidArgumentError("moment order must be >= 1");
  }
  if (q == 0.0) return 0.0;
  if (sigma == 0.0) return kInf;

  // Both integrands concentrate within a few sigma of [0, lambda + 1].
  const double lo = -40.0 * sigma - 1.0;
  const double hi = lambda + 2.0 + 40.0 * sigma;
  const double reach = std::max(std::abs(lo), std::abs(hi));
  const double log_scale = 1.0 + reach * reach / (2.0 * sigma * sigma) +
                           (lambda + 1.0) * (std::abs(std::log(q)) +
                                             reach / (sigma * sigma));

  // E_mu[(mu/mu0)^lambda] = E_mu0[(mu/mu0)^(lambda+1)].
  absl::StatusOr<double> log_e_mu = LogIntegral(
      [&](double z) {
        return LogGaussianDensity(z, sigma) +
               (lambda + 1.0) * LogRatio(z, q, sigma);
      },
      lo, hi, sigma, log_scale);
  if (!log_e_mu.ok()) return log_e_mu.status();
  // E_mu0[(mu0/mu)^lambda].
  absl::StatusOr<double> log_e_mu0 = LogIntegral(
      [&](double z) {
        return LogGaussianDensity(z, sigma) - lambda * LogRatio(z, q, sigma);
      },
      lo, hi, sigma, log_scale);
  if (!log_e_mu0.ok()) return log_e_mu0.status();

  // The true value is >= 0; clamp quadrature round-off.
  return std::max(0.0, std::max(*log_e_mu, *log_e_mu0));
}

PrivacyLedger::PrivacyLedger(int max_lambda) {
  for (int l = 1; l <= max_lambda; ++l) lambdas_.push_back(l);
  alpha_.assign(lambdas_.size(), 0.0);
}

absl::StatusOr<std::vector<double>> StepLogMoments(
    double q, double sigma, std::span<const int> lambdas) {
  std::vector<double> out(lambdas.size());
  for (size_t i = 0; i < lambdas.size(); ++i) {
    absl::StatusOr<double> a = StepLogMoment(q, sigma, lambdas[i]);
    if (!a.ok()) return a.status();
    out[i] = *a;
  }
  return out;
}

absl::Status PrivacyLedger::Compose(double q, double sigma, int64_t steps,
                                    absl::string_view phase_name) {
  if (steps < 0) return absl::InvalidArgumentError("negative step count");
  if (steps == 0) return absl::OkStatus();
  absl::StatusOr<std::vector<double>> per_step =
      StepLogMoments(q, sigma, lambdas_);
  if (!per_step.ok()) return per_step.status();
  return AddSteps(*per_step, q, sigma, steps, phase_name);
}

absl::Status PrivacyLedger::AddSteps(std::span<const double> per_step_alpha,
                                     double q, double sigma, int64_t steps,
                                     absl::string_view phase_name) {
  if (per_step_alpha.size() != alpha_.size()) {
    return absl::InvalidArgumentError("per-step moments on a different grid");
  }
  if (steps < 0) return absl::InvalidArgumentError("negative step count");
  if (steps == 0) return absl::OkStatus();
  for (size_t i = 0; i < alpha_.size(); ++i) {
    alpha_[i] += static_cast<double>(steps) * per_step_alpha[i];
  }
  if (!phases_.empty() && phases_.back().name == phase_name &&
      phases_.back().q == q && phases_.back().sigma == sigma) {
    phases_.back().steps += steps;
  } else {
    phases_.push_back({std::string(phase_name), q, sigma, steps});
  }
  return absl::OkStatus();
}

absl::Status PrivacyLedger::Merge(const PrivacyLedger& other) {
  if (other.lambdas_ != lambdas_) {
    return absl::InvalidArgumentError("ledgers use different lambda grids");
  }
  for (size_t i = 0; i < alpha_.size(); ++i) alpha_[i] += other.alpha_[i];
  phases_.insert(phases_.end(), other.phases_.begin(), other.phases_.end());
  return absl::OkStatus();
}

PrivacySpend PrivacyLedger::EpsilonForDelta(double delta) const {
  PrivacySpend spend{kInf, delta, 0};
  const double log_delta = std::log(delta);
  for (size_t i = 0; i < lambdas_.size(); ++i) {
    const double eps = (alpha_[i] - log_delta) / lambdas_[i];
    if (eps < spend.epsilon) {
      spend.epsilon = eps;
      spend.lambda = lambdas_[i];
    }
  }
  return spend;
}

int64_t PrivacyLedger::steps() const {
  int64_t n = 0;
  for (const PrivacyPhase& p : phases_) n += p.steps;
  return n;
}

bool PrivacyLedger::non_private() const {
  return std::any_of(alpha_.begin(), alpha_.end(),
                     [](double a) { return std::isinf(a); });
}

std::string PrivacyLedger::Serialize(double delta) const {
  std::string out;
  for (const PrivacyPhase& p : phases_) {
    absl::StrAppend(&out, "phase=", p.name.empty() ? "-" : p.name,
                    absl::StrFormat(" q=%.17g sigma=%.17g steps=%d\n", p.q,
                                    p.sigma, p.steps));
  }
  absl::StrAppend(&out, "steps=", steps(), "\n");
  for (size_t i = 0; i < lambdas_.size(); ++i) {
    absl::StrAppend(&out, absl::StrFormat("alpha.%d=%.17g\n", lambdas_[i],
                                          alpha_[i]));
  }
  const PrivacySpend spend = EpsilonForDelta(delta);
  absl::StrAppend(&out, absl::StrFormat("delta=%.17g\n", delta));
  if (std::isinf(spend.epsilon)) {
    absl::StrAppend(&out, "epsilon=inf\nlambda=-\nstatus=NON-PRIVATE\n");
  } else {
    absl::StrAppend(&out, absl::StrFormat("epsilon=%.6f\nlambda=%d\n",
                                          spend.epsilon, spend.lambda));
  }
  return out;
}

int64_t StepsPerEpoch(int64_t dataset_size, int64_t batch_size) {
  const int64_t steps = static_cast<int64_t>(
      std::llround(static_cast<double>(dataset_size) /
                   static_cast<double>(batch_size)));
  return std::max<int64_t>(1, steps);
}

absl::StatusOr<PrivacySpend> ComputeEpsilon(int64_t dataset_size,
                                            int64_t batch_size, double sigma,
                                            int64_t epochs, double delta) {
  if (dataset_size <= 0 || batch_size <= 0 || batch_size > dataset_size) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 0 < batch (%d) <= dataset size (%d)", batch_size, dataset_size));
  }
  if (epochs < 0) return absl::InvalidArgumentError("epochs must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta %g outside (0, 1)", delta));
  }
  if (!(sigma >= 0.0)) {
    return absl::InvalidArgumentError("sigma must be >= 0");
  }
  PrivacyLedger ledger;
  const double q =
      static_cast<double>(batch_size) / static_cast<double>(dataset_size);
  absl::Status st = ledger.Compose(
      q, sigma, epochs * StepsPerEpoch(dataset_size, batch_size), "query");
  if (!st.ok()) return st;
  return ledger.EpsilonForDelta(delta);
}

}  // namespace ptraj
