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

#include "ptraj/tpg_model.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace ptraj {

using nn::Activation;
using nn::Vec;

namespace {

// Diagnostics look at no more than this many training samples.
constexpr int64_t kMaxDiagnosticSamples = 100000;

}  // namespace

TpgModel::TpgModel(OccupiedCellIndex cells, NeighborhoodSpec nb, int embedding,
                   int hidden)
    : cells_(std::move(cells)), nb_(nb), embedding_(embedding), hidden_(hidden) {
  emb_ = layout_.AddEmbedding("location_embedding", cells_.size(), embedding_);
  hidden_layer_ = layout_.AddDense("hidden", input_width(), hidden_,
                                   Activation::kRelu);
  out_ = layout_.AddDense("next_hop", hidden_, nb_.class_count(),
                          Activation::kSoftmax);
  params_.assign(layout_.size(), 0.0);
}

absl::Status TpgModel::SetParams(std::vector<double> params) {
  if (params.size() != layout_.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "TPG expects %d parameters, got %d", layout_.size(), params.size()));
  }
  params_ = std::move(params);
  return absl::OkStatus();
}

void TpgModel::Initialize(uint64_t seed) {
  Rng rng = DeriveRng(seed, RngStream::kInit, 2);
  params_ = nn::InitializeParams(layout_.specs(), rng);
}

Vec TpgModel::Forward(std::span<const double> params, int current,
                      int destination, int hour) const {
  Vec x(input_width());
  x.head(embedding_) = emb_.Row(params, current);
  x.segment(embedding_, embedding_) = emb_.Row(params, destination);
  x[2 * embedding_] = TimeFeature(TimeSlot{hour});
  const Vec h = nn::Relu(hidden_layer_.Preactivation(params, x));
  return nn::Softmax(out_.Preactivation(params, h));
}

absl::StatusOr<Vec> TpgModel::Distribution(CellId current, CellId destination,
                                           TimeSlot hour) const {
  const std::optional<int32_t> cur = cells_.Find(current);
  const std::optional<int32_t> dst = cells_.Find(destination);
  if (!cur || !dst) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cell %d not in the occupied-cell index",
        cur ? destination.index : current.index));
  }
  if (!hour.valid()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("hour %d out of range", hour.hour));
  }
  return Forward(params_, *cur, *dst, hour.hour);
}

absl::StatusOr<double> TpgModel::Loss(std::span<const double> params,
                                      const DenseTransition& s,
                                      std::span<double> grad) const {
  Vec x(input_width());
  x.head(embedding_) = emb_.Row(params, s.current);
  x.segment(embedding_, embedding_) = emb_.Row(params, s.destination);
  x[2 * embedding_] = TimeFeature(TimeSlot{s.hour});
  const Vec pre = hidden_layer_.Preactivation(params, x);
  const Vec h = nn::Relu(pre);
  const Vec p = nn::Softmax(out_.Preactivation(params, h));
  absl::StatusOr<double> loss = nn::CrossEntropy(p, s.label);
  if (!loss.ok()) return loss.status();
  if (!std::isfinite(*loss)) {
    return absl::InternalError(absl::StrFormat(
        "numeric: TPG loss is %g for sample (%d, %d, %d) -> %d", *loss,
        s.current, s.destination, s.hour, s.label));
  }
  if (grad.empty()) return loss;

  const Vec dh =
      out_.Backward(params, h, nn::SoftmaxCrossEntropyGrad(p, s.label), grad);
  const Vec dpre = (pre.array() > 0).select(dh, Vec::Zero(dh.size()));
  const Vec dx = hidden_layer_.Backward(params, x, dpre, grad);
  emb_.AccumulateRow(s.current, dx.head(embedding_), grad);
  emb_.AccumulateRow(s.destination, dx.segment(embedding_, embedding_), grad);
  return loss;
}

absl::StatusOr<DenseTransition> TpgModel::ToDense(
    const TransitionSample& s) const {
  const std::optional<int32_t> cur = cells_.Find(s.current);
  const std::optional<int32_t> dst = cells_.Find(s.destination);
  if (!cur || !dst) {
    return absl::InvalidArgumentError("transition uses an unindexed cell");
  }
  if (s.label < 0 || s.label >= nb_.class_count() || !s.hour.valid()) {
    return absl::InvalidArgumentError("transition label or hour out of range");
  }
  return DenseTransition{*cur, *dst, s.hour.hour, s.label};
}

ModelFile TpgModel::ToFile() const {
  ModelFile f;
  f.tag = "TPG";
  f.metadata = metadata_;
  f.metadata["occupied"] = FormatCellList(cells_);
  f.metadata["radius"] = absl::StrCat(nb_.radius);
  f.layers = layout_.specs();
  f.params = params_;
  return f;
}

absl::StatusOr<TpgModel> TpgModel::FromFile(const ModelFile& file) {
  if (file.tag != "TPG") {
    return absl::FailedPreconditionError(
        absl::StrCat("expected a TPG model, found tag '", file.tag, "'"));
  }
  auto occ = file.metadata.find("occupied");
  auto rad = file.metadata.find("radius");
  if (occ == file.metadata.end() || rad == file.metadata.end()) {
    return absl::DataLossError("TPG model lacks occupied cells or radius");
  }
  absl::StatusOr<OccupiedCellIndex> cells = ParseCellList(occ->second);
  if (!cells.ok()) return cells.status();
  NeighborhoodSpec nb;
  if (!absl::SimpleAtoi(rad->second, &nb.radius) || nb.radius < 1) {
    return absl::DataLossError("bad TPG radius");
  }
  if (file.layers.size() != 3) {
    return absl::DataLossError("TPG model must have 3 layers");
  }
  TpgModel model(*std::move(cells), nb, file.layers[0].cols,
                 file.layers[1].cols);
  if (model.layer_specs() != file.layers) {
    return absl::DataLossError(
        "TPG layer manifest does not match architecture");
  }
  absl::Status st = model.SetParams(file.params);
  if (!st.ok()) return st;
  model.metadata_ = file.metadata;
  model.metadata_.erase("occupied");
  model.metadata_.erase("radius");
  return model;
}

Vec MaskedDistribution(const Vec& dist, CellId current, const GridSpec& grid,
                       const NeighborhoodSpec& nb,
                       const OccupiedCellIndex& occupied) {
  Vec masked = Vec::Zero(dist.size());
  std::vector<bool> valid(dist.size(), false);
  int valid_count = 0;
  for (int cls = 0; cls < dist.size(); ++cls) {
    if (cls == nb.center_class()) continue;
    const std::optional<CellId> target = OffsetToCell(current, cls, nb, grid);
    if (!target || !occupied.Contains(*target)) continue;
    valid[cls] = true;
    ++valid_count;
    masked[cls] = dist[cls];
  }
  const double total = masked.sum();
  if (total > 0) return masked / total;
  for (int cls = 0; cls < dist.size(); ++cls) {
    if (valid[cls]) masked[cls] = 1.0 / valid_count;
  }
  return masked;
}

double PredictionErrorMeters(const Vec& dist, int label,
                             const NeighborhoodSpec& nb, const GridSpec& grid) {
  const CellCoord predicted = nb.OffsetFor(nn::Argmax(dist));
  const CellCoord truth = nb.OffsetFor(label);
  return grid.cell_size_m() *
         std::hypot(static_cast<double>(predicted.row - truth.row),
                    static_cast<double>(predicted.col - truth.col));
}

TpgTrainingData BuildTpgTrainingData(const TpgModel& model,
                                     const Dataset& dataset,
                                     const GridSpec& grid) {
  TpgTrainingData data;
  data.offsets.push_back(0);
  for (const Trajectory& t : dataset.trajectories) {
    const size_t before = data.samples.size();
    for (const TransitionSample& s :
         ExtractTransitionSamples(t, model.neighborhood(), grid, &data.stats)) {
      absl::StatusOr<DenseTransition> d = model.ToDense(s);
      if (d.ok()) data.samples.push_back(*d);
    }
    if (data.samples.size() > before) {
      data.offsets.push_back(static_cast<int64_t>(data.samples.size()));
    }
  }
  return data;
}

TpgDiagnostics EvaluateTpg(const TpgModel& model,
                           std::span<const DenseTransition> samples,
                           const GridSpec& grid) {
  TpgDiagnostics diag;
  if (samples.empty()) return diag;
  const size_t stride = std::max<size_t>(
      1, samples.size() / static_cast<size_t>(kMaxDiagnosticSamples));
  int64_t correct = 0;
  double error_sum = 0;
  for (size_t i = 0; i < samples.size(); i += stride) {
    const DenseTransition& s = samples[i];
    const Vec p = model.Forward(model.params(), s.current, s.destination,
                                s.hour);
    if (nn::Argmax(p) == s.label) ++correct;
    error_sum += PredictionErrorMeters(p, s.label, model.neighborhood(), grid);
    ++diag.evaluated;
  }
  diag.accuracy = static_cast<double>(correct) / diag.evaluated;
  diag.mean_error_m = error_sum / diag.evaluated;
  return diag;
}

absl::StatusOr<TpgTrainingResult> TrainTpg(TpgModel& model,
                                           const Dataset& dataset,
                                           const GridSpec& grid,
                                           const DpSgdConfig& cfg,
                                           PrivacyLedger* ledger) {
  TpgTrainingData data = BuildTpgTrainingData(model, dataset, grid);
  if (data.trajectories() <= 0) {
    return absl::FailedPreconditionError(
        "TPG training needs at least one trajectory with a usable transition");
  }
  std::vector<int64_t> counts(data.trajectories());
  for (int64_t i = 0; i < data.trajectories(); ++i) {
    counts[i] = data.offsets[i + 1] - data.offsets[i];
  }

  TrainingJob job;
  job.config = cfg;
  job.dataset_size = data.trajectories();
  job.phase_name = "TPG";
  job.ledger = ledger;
  job.sampler = [&counts, &data, &cfg](Rng& rng) {
    std::vector<int64_t> batch;
    batch.reserve(cfg.batch_size);
    for (const TwoStageDraw& d :
         SampleBatchTwoStage(counts, cfg.batch_size, rng)) {
      batch.push_back(data.offsets[d.trajectory] + d.sample);
    }
    return batch;
  };
  job.loss = [&model, &data](std::span<const double> params, int64_t example,
                             Rng&, std::span<double> grad) {
    return model.Loss(params, data.samples[example], grad);
  };
  absl::StatusOr<TrainingReport> report = RunDpSgd(job, model.mutable_params());
  if (!report.ok()) return report.status();
  return TpgTrainingResult{*std::move(report),
                           EvaluateTpg(model, data.samples, grid)};
}

}  // namespace ptraj
