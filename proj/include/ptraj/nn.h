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

// Small neural-network kernel for the two fixed architectures. Parameters
// of a model live in one flat vector; layers are views at fixed offsets so
// a per-example gradient is a flat vector with the same layout.

#ifndef PTRAJ_NN_H_
#define PTRAJ_NN_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "ptraj/rng.h"

namespace ptraj::nn {

using Vec = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMajorMatrix>;
using ConstMatrixView = Eigen::Map<const RowMajorMatrix>;
using VecView = Eigen::Map<Eigen::VectorXd>;
using ConstVecView = Eigen::Map<const Eigen::VectorXd>;

inline constexpr double kProbabilityFloor = 1e-12;

enum class Activation { kRelu, kLinear, kSoftmax };
absl::string_view ActivationName(Activation a);
absl::StatusOr<Activation> ParseActivation(absl::string_view name);

enum class LayerKind { kDense, kEmbedding };

// One entry of a model manifest: enough to rebuild the parameter layout.
struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::string name;
  int rows = 0;  // dense: in_dim, embedding: vocab size
  int cols = 0;  // dense: out_dim, embedding: embedding dim
  Activation activation = Activation::kLinear;  // dense only

  size_t param_count() const {
    const size_t w = static_cast<size_t>(rows) * static_cast<size_t>(cols);
    return kind == LayerKind::kDense ? w + static_cast<size_t>(cols) : w;
  }
  bool operator==(const LayerSpec&) const = default;
};

// Fully connected layer y = act(x W + b), W stored row-major [in x out]
// followed by b [out] at `offset` in the flat parameter vector.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(int in_dim, int out_dim, Activation act, size_t offset)
      : in_dim_(in_dim), out_dim_(out_dim), act_(act), offset_(offset) {}

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  Activation activation() const { return act_; }
  size_t offset() const { return offset_; }
  size_t param_count() const {
    return static_cast<size_t>(in_dim_) * out_dim_ + out_dim_;
  }

  ConstMatrixView W(std::span<const double> params) const {
    return ConstMatrixView(params.data() + offset_, in_dim_, out_dim_);
  }
  ConstVecView b(std::span<const double> params) const {
    return ConstVecView(params.data() + offset_ + in_dim_ * out_dim_,
                        out_dim_);
  }
  MatrixView W(std::span<double> params) const {
    return MatrixView(params.data() + offset_, in_dim_, out_dim_);
  }
  VecView b(std::span<double> params) const {
    return VecView(params.data() + offset_ + in_dim_ * out_dim_, out_dim_);
  }

  // x W + b, no activation.
  Vec Preactivation(std::span<const double> params, const Vec& x) const;
  // Same for a one-hot-sum input: sum of the selected rows of W, plus b.
  Vec PreactivationSparse(std::span<const double> params,
                          std::span<const int> hot_rows) const;
  // act(x W + b). Shape error on dimension mismatch.
  absl::StatusOr<Vec> Forward(std::span<const double> params,
                              const Vec& x) const;

  // Given dL/d(pre-activation), adds dL/dW and dL/db into `grad` and
  // returns dL/dx.
  Vec Backward(std::span<const double> params, const Vec& x, const Vec& dpre,
               std::span<double> grad) const;
  // Backward for a one-hot-sum input; dL/dx is not needed there.
  void BackwardSparse(std::span<const int> hot_rows, const Vec& dpre,
                      std::span<double> grad) const;

 private:
  int in_dim_ = 0;
  int out_dim_ = 0;
  Activation act_ = Activation::kLinear;
  size_t offset_ = 0;
};

// Lookup table [vocab x dim] at `offset`.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(int vocab, int dim, size_t offset)
      : vocab_(vocab), dim_(dim), offset_(offset) {}

  int vocab() const { return vocab_; }
  int dim() const { return dim_; }
  size_t offset() const { return offset_; }
  size_t param_count() const { return static_cast<size_t>(vocab_) * dim_; }

  ConstVecView Row(std::span<const double> params, int i) const {
    return ConstVecView(params.data() + offset_ + static_cast<size_t>(i) * dim_,
                        dim_);
  }
  // Adds `g` to the gradient of row i only.
  void AccumulateRow(int i, const Vec& g, std::span<double> grad) const {
    VecView(grad.data() + offset_ + static_cast<size_t>(i) * dim_, dim_) += g;
  }

 private:
  int vocab_ = 0;
  int dim_ = 0;
  size_t offset_ = 0;
};

// Assigns consecutive offsets to layers in declaration order.
class ParamLayout {
 public:
  DenseLayer AddDense(std::string name, int in_dim, int out_dim,
                      Activation act);
  EmbeddingTable AddEmbedding(std::string name, int vocab, int dim);

  size_t size() const { return size_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }

 private:
  size_t size_ = 0;
  std::vector<LayerSpec> specs_;
};

// Dense weights ~ U(+-sqrt(6/(fan_in+fan_out))), biases 0, embeddings
// ~ N(0, 0.05), drawn in layout order.
std::vector<double> InitializeParams(const std::vector<LayerSpec>& specs,
                                     Rng& rng);

Vec Relu(const Vec& x);
// Numerically stable softmax (max subtracted).
Vec Softmax(const Vec& logits);
Vec ApplyActivation(Activation act, const Vec& pre);

// -ln(max(p[label], 1e-12)). OutOfRange if label is not an index of p.
absl::StatusOr<double> CrossEntropy(const Vec& probabilities, int label);

// Gradient of CrossEntropy(Softmax(logits), label) w.r.t. the logits:
// p - one_hot(label), or zero when p[label] is below the floor (the loss is
// flat there).
Vec SoftmaxCrossEntropyGrad(const Vec& probabilities, int label);

// z = mean + exp(log_var / 2) * noise.
Vec Reparameterize(const Vec& mean, const Vec& log_var, const Vec& noise);

// KL(N(mean, exp(log_var)) || N(0, I)).
double KlStandardNormal(const Vec& mean, const Vec& log_var);

Vec StandardNormalVector(int dim, Rng& rng);

// Index of the largest entry; ties go to the lower index.
int Argmax(const Vec& v);

// Samples an index from a categorical distribution.
int SampleCategorical(const Vec& probabilities, Rng& rng);

double L2Norm(std::span<const double> v);

}  // namespace ptraj::nn

#endif  // PTRAJ_NN_H_
