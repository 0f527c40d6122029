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

// Independent reference implementations used to check the production code.
// Each one trades speed for obviousness.

#ifndef PTRAJ_TESTS_ORACLES_H_
#define PTRAJ_TESTS_ORACLES_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "ptraj/rng.h"
#include "ptraj/trace_generator.h"

namespace ptraj::oracle {

// Loss as a function of the flat parameter vector.
using LossFn = std::function<double(std::span<const double>)>;

// Central differences of `loss` at `params` with step h, one coordinate at a
// time.
std::vector<double> NumericGradient(const LossFn& loss,
                                    std::vector<double> params,
                                    double h = 1e-4);

// ||a - n|| / max(||a||, ||n||, 1e-8).
double RelativeError(std::span<const double> analytic,
                     std::span<const double> numeric);

// Minimum total weight over every simple src -> dst path, by depth-first
// enumeration. nullopt if dst is unreachable.
std::optional<double> MinSimplePathWeight(RoutingGraph& graph, int src,
                                          int dst);

// Sum of edge weights along `path`; nullopt if a hop has no edge.
std::optional<double> PathWeight(RoutingGraph& graph,
                                 const std::vector<int>& path);

// Optimal cost of the balanced transportation problem by enumerating every
// integral plan. Exact because the transportation polytope has integral
// vertices. Only for tiny totals.
double BruteForceTransport(const std::vector<int64_t>& supply,
                           const std::vector<int64_t>& demand,
                           const Eigen::MatrixXd& cost);

// Same problem as min-cost flow by successive shortest paths with
// Bellman-Ford, augmenting by bottleneck capacity. Exact for integral
// masses; polynomial, so usable on larger instances.
double MinCostFlowTransport(const std::vector<int64_t>& supply,
                            const std::vector<int64_t>& demand,
                            const Eigen::MatrixXd& cost);

// log E_mu[(mu/mu0)^lambda] = log E_mu0[(mu/mu0)^(lambda+1)] for
// mu0 = N(0,s^2), mu = (1-q) N(0,s^2) + q N(1,s^2), from the binomial
// expansion in long double. This is the larger of the two orderings.
double BinomialLogMoment(double q, double sigma, int lambda);

// Both orderings of the log moment by the trapezoid rule on a uniform grid
// of `points_per_sigma` nodes per standard deviation. Returns the larger.
double TrapezoidLogMoment(double q, double sigma, int lambda,
                          int points_per_sigma = 2000);

}  // namespace ptraj::oracle

#endif  // PTRAJ_TESTS_ORACLES_H_
