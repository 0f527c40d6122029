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

// Transition probability generator: next-hop classifier over the (2s+1)^2
// relative offsets around the current cell.
//
//   emb(current) ++ emb(destination) ++ [hour / 23]     2 * embed + 1
//   hidden   dense(hidden, relu)
//   output   dense((2s+1)^2, softmax)
//
// One location embedding table is shared by both lookups. Parameter layout:
// embedding [|L| x embed], hidden, output.

#ifndef PTRAJ_TPG_MODEL_H_
#define PTRAJ_TPG_MODEL_H_

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
#include "ptraj/preprocess.h"

namespace ptraj {

struct DenseTransition {
  int current = 0;
  int destination = 0;
  int hour = 0;
  int label = 0;
};

class TpgModel {
 public:
  static constexpr int kDefaultEmbedding = 50;
  static constexpr int kDefaultHidden = 200;

  TpgModel(OccupiedCellIndex cells, NeighborhoodSpec nb,
           int embedding = kDefaultEmbedding, int hidden = kDefaultHidden);

  const OccupiedCellIndex& cells() const { return cells_; }
  const NeighborhoodSpec& neighborhood() const { return nb_; }
  int class_count() const { return nb_.class_count(); }
  int embedding_dim() const { return embedding_; }
  int input_width() const { return 2 * embedding_ + 1; }
  size_t param_count() const { return layout_.size(); }
  const std::vector<nn::LayerSpec>& layer_specs() const {
    return layout_.specs();
  }

  std::span<const double> params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  absl::Status SetParams(std::vector<double> params);
  void Initialize(uint64_t seed);

  // Scalar time input.
  static double TimeFeature(TimeSlot hour) { return hour.hour / 23.0; }

  nn::Vec Forward(std::span<const double> params, int current, int destination,
                  int hour) const;
  // Distribution over classes for full-grid cells; error if a cell is not
  // indexed or the hour is invalid.
  absl::StatusOr<nn::Vec> Distribution(CellId current, CellId destination,
                                       TimeSlot hour) const;

  // Cross-entropy of one sample; exact gradient added into `grad` when it
  // is non-empty.
  absl::StatusOr<double> Loss(std::span<const double> params,
                              const DenseTransition& s,
                              std::span<double> grad = {}) const;

  absl::StatusOr<DenseTransition> ToDense(const TransitionSample& s) const;
  // Output layer (hidden -> classes) block, for tests and diagnostics.
  const nn::DenseLayer& output_layer() const { return out_; }
  const nn::EmbeddingTable& embedding() const { return emb_; }

  ModelFile ToFile() const;
  static absl::StatusOr<TpgModel> FromFile(const ModelFile& file);

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const {
    return metadata_;
  }

 private:
  OccupiedCellIndex cells_;
  NeighborhoodSpec nb_;
  int embedding_;
  int hidden_;
  nn::ParamLayout layout_;
  nn::EmbeddingTable emb_;
  nn::DenseLayer hidden_layer_, out_;
  std::vector<double> params_;
  std::map<std::string, std::string> metadata_;
};

// Zeroes the center class and every class whose target cell lies outside
// the grid or outside `occupied`, then renormalizes. Falls back to uniform
// over the remaining valid classes when no mass is left; all zeros if no
// class is valid.
nn::Vec MaskedDistribution(const nn::Vec& dist, CellId current,
                           const GridSpec& grid, const NeighborhoodSpec& nb,
                           const OccupiedCellIndex& occupied);

// Distance between the argmax class's target cell and the label's target
// cell (argmax ties -> lower class).
double PredictionErrorMeters(const nn::Vec& dist, int label,
                             const NeighborhoodSpec& nb, const GridSpec& grid);

struct TpgTrainingData {
  std::vector<DenseTransition> samples;
  // samples of trajectory i are [offsets[i], offsets[i+1]).
  std::vector<int64_t> offsets;
  PreprocessStats stats;

  int64_t trajectories() const {
    return static_cast<int64_t>(offsets.size()) - 1;
  }
};

// Decomposes every trajectory into transition samples; trajectories with no
// usable transition are left out.
TpgTrainingData BuildTpgTrainingData(const TpgModel& model,
                                     const Dataset& dataset,
                                     const GridSpec& grid);

struct TpgDiagnostics {
  double accuracy = 0;
  double mean_error_m = 0;
  int64_t evaluated = 0;
};

TpgDiagnostics EvaluateTpg(const TpgModel& model,
                           std::span<const DenseTransition> samples,
                           const GridSpec& grid);

struct TpgTrainingResult {
  TrainingReport report;
  TpgDiagnostics diagnostics;
};

// DP-SGD with two-stage (trajectory, then transition) batch sampling.
// q = B / |D| with |D| the number of trajectories.
absl::StatusOr<TpgTrainingResult> TrainTpg(TpgModel& model,
                                           const Dataset& dataset,
                                           const GridSpec& grid,
                                           const DpSgdConfig& cfg,
                                           PrivacyLedger* ledger);

}  // namespace ptraj

#endif  // PTRAJ_TPG_MODEL_H_
