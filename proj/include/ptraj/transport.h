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

// Exact balanced transportation problem solved with the transportation
// simplex. Masses are integers so feasibility and degeneracy are handled
// exactly; only costs are floating point.

#ifndef PTRAJ_TRANSPORT_H_
#define PTRAJ_TRANSPORT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"

namespace ptraj {

struct TransportFlow {
  int from = 0;
  int to = 0;
  int64_t amount = 0;
};

struct TransportSolution {
  double cost = 0;
  // Positive flows only, sorted by (from, to).
  std::vector<TransportFlow> flows;
  int64_t pivots = 0;
};

// Minimizes sum cost(i, j) * flow(i, j) subject to row sums = supply and
// column sums = demand. Supplies and demands must be >= 0 with equal totals;
// costs must be finite. Zero-mass rows and columns are allowed.
absl::StatusOr<TransportSolution> SolveTransport(
    std::span<const int64_t> supply, std::span<const int64_t> demand,
    const Eigen::MatrixXd& cost);

}  // namespace ptraj

#endif  // PTRAJ_TRANSPORT_H_
