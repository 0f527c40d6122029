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

// Trajectory initializer: a variational autoencoder over (source cell,
// destination cell, hour) triples.
//
//   input  one-hot(src) ++ one-hot(dst) ++ one-hot(hour)    2|L| + 24
//   enc1   dense(hidden, relu)
//   enc2   dense(hidden, linear)
//   mean, log_var   two linear heads of size latent
//   z      mean + exp(log_var / 2) * noise
//   dec1   dense(hidden, relu)
//   heads  softmax(|L|), softmax(|L|), softmax(24)
//
// Loss = KL(q(z|x) || N(0, I)) + sum of the three heads' cross-entropies.
//
// Parameter layout (flat, in this order): enc1, enc2, mean, log_var, dec1,
// head_src, head_dst, head_hour; each dense block is W [in x out] row-major
// then b [out].

#ifndef PTRAJ_TI_MODEL_H_
#define PTRAJ_TI_MODEL_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ptraj/dataset.h"
#include "ptraj/dp_sgd.h"
#include "ptraj/geo_grid.h"
#include "ptraj/model_io.h"
#include "ptraj/nn.h"

namespace ptraj {

struct EndpointTriple {
  CellId src;
  CellId dst;
  TimeSlot hour;
  bool operator==(const EndpointTriple&) const = default;
};

// Triple in the model's dense indexing.
struct DenseTriple {
  int src = 0;
  int dst = 0;
  int hour = 0;
};

struct TiHeads {
  nn::Vec src;
  nn::Vec dst;
  nn::Vec hour;
};

class TiModel {
 public:
  static constexpr int kDefaultHidden = 100;
  static constexpr int kDefaultLatent = 50;

  explicit TiModel(OccupiedCellIndex cells, int hidden = kDefaultHidden,
                   int latent = kDefaultLatent);

  const OccupiedCellIndex& cells() const { return cells_; }
  int input_dim() const { return 2 * cells_.size() + kHoursPerDay; }
  int hidden() const { return hidden_; }
  int latent() const { return latent_; }
  size_t param_count() const { return layout_.size(); }
  const std::vector<nn::LayerSpec>& layer_specs() const {
    return layout_.specs();
  }

  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  absl::Status SetParams(std::vector<double> params);
  void Initialize(uint64_t seed);

  absl::StatusOr<DenseTriple> ToDense(const EndpointTriple& t) const;
  // Concatenated one-hot encoding; error if a cell is not indexed.
  absl::StatusOr<nn::Vec> EncodeInput(const EndpointTriple& t) const;

  // Loss for one triple with fixed reparameterization noise. When `grad` is
  // non-empty the exact gradient is added into it.
  absl::StatusOr<double> Loss(std::span<const double> params,
                              const DenseTriple& t, const nn::Vec& noise,
                              std::span<double> grad = {}) const;
  absl::StatusOr<double> Loss(const EndpointTriple& t,
                              const nn::Vec& noise) const;

  // Encoder outputs for a triple.
  void Encode(std::span<const double> params, const DenseTriple& t,
              nn::Vec* mean, nn::Vec* log_var) const;
  // Head distributions for a latent vector.
  TiHeads Decode(std::span<const double> params, const nn::Vec& z) const;
  TiHeads Decode(const nn::Vec& z) const { return Decode(params_, z); }

  // z ~ N(0, I), decode, then one independent categorical draw per head.
  EndpointTriple Sample(Rng& rng) const;

  ModelFile ToFile() const;
  static absl::StatusOr<TiModel> FromFile(const ModelFile& file);

  // Metadata carried into the model file.
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const {
    return metadata_;
  }

 private:
  OccupiedCellIndex cells_;
  int hidden_;
  int latent_;
  nn::ParamLayout layout_;
  nn::DenseLayer enc1_, enc2_, mean_, log_var_, dec1_, head_src_, head_dst_,
      head_hour_;
  std::vector<double> params_;
  std::map<std::string, std::string> metadata_;
};

// One training record per trajectory: (source, destination, hour).
std::vector<DenseTriple> TiTrainingRecords(const TiModel& model,
                                           const Dataset& dataset);

// DP-SGD with Poisson sampling over trajectories.
absl::StatusOr<TrainingReport> TrainTi(TiModel& model, const Dataset& dataset,
                                       const DpSgdConfig& cfg,
                                       PrivacyLedger* ledger);

}  // namespace ptraj

#endif  // PTRAJ_TI_MODEL_H_
