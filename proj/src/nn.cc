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

#include "ptraj/nn.h"

#include <cmath>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/string_view.h"

namespace ptraj::nn {

absl::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kLinear:
      return "linear";
    case Activation::kSoftmax:
      return "softmax";
  }
  return "linear";
}

absl::StatusOr<Activation> ParseActivation(absl::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "linear") return Activation::kLinear;
  if (name == "softmax") return Activation::kSoftmax;
  return absl::InvalidArgumentError(absl::StrCat("unknown activation ", name));
}

Vec DenseLayer::Preactivation(std::span<const double> params,
                              const Vec& x) const {
  return W(params).transpose() * x + b(params);
}

Vec DenseLayer::PreactivationSparse(std::span<const double> params,
                                    std::span<const int> hot_rows) const {
  Vec out = b(params);
  const ConstMatrixView w = W(params);
  for (int r : hot_rows) out += w.row(r).transpose();
  return out;
}

absl::StatusOr<Vec> DenseLayer::Forward(std::span<const double> params,
                                        const Vec& x) const {
  if (x.size() != in_dim_) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "dense layer expects input of size %d, got %d", in_dim_, x.size()));
  }
  if (params.size() < offset_ + param_count()) {
    return absl::InvalidArgumentError("parameter vector too short for layer");
  }
  return ApplyActivation(act_, Preactivation(params, x));
}

Vec DenseLayer::Backward(std::span<const double> params, const Vec& x,
                         const Vec& dpre, std::span<double> grad) const {
  W(grad).noalias() += x * dpre.transpose();
  b(grad) += dpre;
  return W(params) * dpre;
}

void DenseLayer::BackwardSparse(std::span<const int> hot_rows, const Vec& dpre,
                                std::span<double> grad) const {
  MatrixView gw = W(grad);
  for (int r : hot_rows) gw.row(r) += dpre.transpose();
  b(grad) += dpre;
}

DenseLayer ParamLayout::AddDense(std::string name, int in_dim, int out_dim,
                                 Activation act) {
  DenseLayer layer(in_dim, out_dim, act, size_);
  size_ += layer.param_count();
  specs_.push_back({LayerKind::kDense, std::move(name), in_dim, out_dim, act});
  return layer;
}

EmbeddingTable ParamLayout::AddEmbedding(std::string name, int vocab, int dim) {
  EmbeddingTable table(vocab, dim, size_);
  size_ += table.param_count();
  specs_.push_back({LayerKind::kEmbedding, std::move(name), vocab, dim,
                    Activation::kLinear});
  return table;
}

std::vector<double> InitializeParams(const std::vector<LayerSpec>& specs,
                                     Rng& rng) {
  std::vector<double> params;
  for (const LayerSpec& s : specs) {
    const size_t w = static_cast<size_t>(s.rows) * s.cols;
    if (s.kind == LayerKind::kDense) {
      const double limit = std::sqrt(6.0 / (s.rows + s.cols));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (size_t i = 0; i < w; ++i) params.push_back(u(rng));
      params.insert(params.end(), s.cols, 0.0);
    } else {
      std::normal_distribution<double> n(0.0, 0.05);
      for (size_t i = 0; i < w; ++i) params.push_back(n(rng));
    }
  }
  return params;
}

Vec Relu(const Vec& x) { return x.cwiseMax(0.0); }

Vec Softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Vec ApplyActivation(Activation act, const Vec& pre) {
  switch (act) {
    case Activation::kRelu:
      return Relu(pre);
    case Activation::kSoftmax:
      return Softmax(pre);
    case Activation::kLinear:
      break;
  }
  return pre;
}

absl::StatusOr<double> CrossEntropy(const Vec& probabilities, int label) {
  if (label < 0 || label >= probabilities.size()) {
    return absl::OutOfRangeError(absl::StrFormat(
        "label %d outside [0, %d)", label, probabilities.size()));
  }
  return -std::log(std::max(probabilities[label], kProbabilityFloor));
}

Vec SoftmaxCrossEntropyGrad(const Vec& probabilities, int label) {
  if (probabilities[label] < kProbabilityFloor) {
    return Vec::Zero(probabilities.size());
  }
  Vec g = probabilities;
  g[label] -= 1.0;
  return g;
}

Vec Reparameterize(const Vec& mean, const Vec& log_var, const Vec& noise) {
  return mean + ((0.5 * log_var).array().exp() * noise.array()).matrix();
}

double KlStandardNormal(const Vec& mean, const Vec& log_var) {
  // Each term 1 + v - m^2 - e^v is <= 0 since e^v >= 1 + v.
  return -0.5 * (1.0 + log_var.array() - mean.array().square() -
                 log_var.array().exp())
                    .sum();
}

Vec StandardNormalVector(int dim, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v;
}

int Argmax(const Vec& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

int SampleCategorical(const Vec& probabilities, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double target = u(rng) * probabilities.sum();
  double acc = 0;
  for (int i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (target < acc) return i;
  }
  // Rounding left `target` past the last bucket: take the last nonzero one.
  for (int i = static_cast<int>(probabilities.size()) - 1; i > 0; --i) {
    if (probabilities[i] > 0) return i;
  }
  return 0;
}

double L2Norm(std::span<const double> v) {
  return ConstVecView(v.data(), static_cast<Eigen::Index>(v.size())).norm();
}

}  // namespace ptraj::nn
