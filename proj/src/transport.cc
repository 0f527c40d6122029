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

#include "ptraj/transport.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace ptraj {
namespace {

// Basic cell of the spanning tree. Rows are nodes [0, m), columns [m, m+n).
struct Basic {
  int row;
  int col;
  int64_t flow;
};

class TransportSimplex {
 public:
  TransportSimplex(std::span<const int64_t> supply,
                   std::span<const int64_t> demand, const Eigen::MatrixXd& cost)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        cost_(cost),
        incident_(m_ + n_),
        u_(m_),
        v_(n_) {
    NorthwestCorner(supply, demand);
  }

  absl::StatusOr<TransportSolution> Solve() {
    const int64_t cells = static_cast<int64_t>(m_) * n_;
    const int64_t block = std::max<int64_t>(
        64, static_cast<int64_t>(std::sqrt(static_cast<double>(cells))));
    const int64_t max_pivots = 50 * static_cast<int64_t>(m_ + n_) * 
                                   static_cast<int64_t>(m_ + n_) + 1000;
    double scale = 0;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) scale = std::max(scale, std::abs(cost_(i, j)));
    }
    const double eps = 1e-12 * (1.0 + scale) * (m_ + n_);

    int64_t cursor = 0;
    int64_t pivots = 0;
    while (true) {
      ComputePotentials();
      // Block search: scan blocks of cells starting at the cursor and take
      // the most negative reduced cost in the first block that has one.
      int best_i = -1, best_j = -1;
      double best = -eps;
      int64_t scanned = 0;
      while (scanned < cells) {
        const int64_t end = std::min(cells, scanned + block);
        for (; scanned < end; ++scanned) {
          const int64_t k = (cursor + scanned) % cells;
          const int i = static_cast<int>(k / n_);
          const int j = static_cast<int>(k % n_);
          const double reduced = cost_(i, j) - u_[i] - v_[j];
          if (reduced < best) {
            best = reduced;
            best_i = i;
            best_j = j;
          }
        }
        if (best_i >= 0) break;
      }
      if (best_i < 0) break;
      cursor = (cursor + scanned) % cells;
      if (++pivots > max_pivots) {
        return absl::InternalError(absl::StrFormat(
            "numeric: transport simplex exceeded %d pivots", max_pivots));
      }
      Pivot(best_i, best_j);
    }

    TransportSolution sol;
    sol.pivots = pivots;
    for (const Basic& b : basis_) {
      if (b.flow > 0) sol.flows.push_back({b.row, b.col, b.flow});
    }
    std::sort(sol.flows.begin(), sol.flows.end(),
              [](const TransportFlow& a, const TransportFlow& b) {
                return std::pair(a.from, a.to) < std::pair(b.from, b.to);
              });
    for (const TransportFlow& f : sol.flows) {
      sol.cost += static_cast<double>(f.amount) * cost_(f.from, f.to);
    }
    return sol;
  }

 private:
  void AddBasic(int row, int col, int64_t flow) {
    const int id = static_cast<int>(basis_.size());
    basis_.push_back({row, col, flow});
    incident_[row].push_back(id);
    incident_[m_ + col].push_back(id);
  }

  void NorthwestCorner(std::span<const int64_t> supply,
                       std::span<const int64_t> demand) {
    std::vector<int64_t> a(supply.begin(), supply.end());
    std::vector<int64_t> b(demand.begin(), demand.end());
    int i = 0, j = 0;
    while (true) {
      const int64_t x = std::min(a[i], b[j]);
      AddBasic(i, j, x);
      a[i] -= x;
      b[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if ((a[i] == 0 && i < m_ - 1) || j == n_ - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  int Other(int edge, int node) const {
    const Basic& b = basis_[edge];
    return node == b.row ? m_ + b.col : b.row;
  }

  void ComputePotentials() {
    std::vector<bool> seen(m_ + n_, false);
    std::vector<int> stack{0};
    seen[0] = true;
    u_[0] = 0;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (int e : incident_[node]) {
        const int next = Other(e, node);
        if (seen[next]) continue;
        seen[next] = true;
        const Basic& b = basis_[e];
        if (next >= m_) {
          v_[b.col] = cost_(b.row, b.col) - u_[b.row];
        } else {
          u_[b.row] = cost_(b.row, b.col) - v_[b.col];
        }
        stack.push_back(next);
      }
    }
  }

  // Tree path from row node `from` to column node `to`, as basic-cell ids.
  std::vector<int> TreePath(int from, int to) const {
    std::vector<int> via(m_ + n_, -1);
    std::vector<bool> seen(m_ + n_, false);
    std::vector<int> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (node == to) break;
      for (int e : incident_[node]) {
        const int next = Other(e, node);
        if (seen[next]) continue;
        seen[next] = true;
        via[next] = e;
        stack.push_back(next);
      }
    }
    std::vector<int> path;
    for (int node = to; node != from;) {
      const int e = via[node];
      path.push_back(e);
      node = Other(e, node);
    }
    // path[0] touches `to`; reverse so it runs from `from` to `to`.
    std::reverse(path.begin(), path.end());
    return path;
  }

  void Pivot(int row, int col) {
    const std::vector<int> path = TreePath(row, m_ + col);
    // The cycle is entering(+), then the path walked back from the column:
    // the last path edge loses flow, the one before gains, and so on.
    const int k = static_cast<int>(path.size());
    int64_t theta = std::numeric_limits<int64_t>::max();
    int leaving = -1;
    for (int t = k - 1; t >= 0; t -= 2) {
      const int e = path[t];
      if (basis_[e].flow < theta) {
        theta = basis_[e].flow;
        leaving = e;
      }
    }
    for (int t = 0; t < k; ++t) {
      const bool minus = ((k - 1 - t) % 2) == 0;
      basis_[path[t]].flow += minus ? -theta : theta;
    }
    // Replace the leaving cell in place with the entering one.
    Basic& out = basis_[leaving];
    auto detach = [&](int node) {
      auto& list = incident_[node];
      list.erase(std::find(list.begin(), list.end(), leaving));
    };
    detach(out.row);
    detach(m_ + out.col);
    out = {row, col, theta};
    incident_[row].push_back(leaving);
    incident_[m_ + col].push_back(leaving);
  }

  int m_;
  int n_;
  const Eigen::MatrixXd& cost_;
  std::vector<Basic> basis_;
  std::vector<std::vector<int>> incident_;
  std::vector<double> u_;
  std::vector<double> v_;
};

}  // namespace

absl::StatusOr<TransportSolution> SolveTransport(
    std::span<const int64_t> supply, std::span<const int64_t> demand,
    const Eigen::MatrixXd& cost) {
  if (supply.empty() || demand.empty()) {
    return absl::InvalidArgumentError("transport needs non-empty margins");
  }
  if (cost.rows() != static_cast<Eigen::Index>(supply.size()) ||
      cost.cols() != static_cast<Eigen::Index>(demand.size())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cost matrix is %dx%d, margins are %d and %d", cost.rows(),
        cost.cols(), supply.size(), demand.size()));
  }
  if (!cost.allFinite()) {
    return absl::InvalidArgumentError("transport costs must be finite");
  }
  int64_t total_supply = 0, total_demand = 0;
  for (int64_t s : supply) {
    if (s < 0) return absl::InvalidArgumentError("negative supply");
    total_supply += s;
  }
  for (int64_t d : demand) {
    if (d < 0) return absl::InvalidArgumentError("negative demand");
    total_demand += d;
  }
  if (total_supply != total_demand) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "unbalanced transport: supply %d, demand %d", total_supply,
        total_demand));
  }
  TransportSimplex simplex(supply, demand, cost);
  return simplex.Solve();
}

}  // namespace ptraj
