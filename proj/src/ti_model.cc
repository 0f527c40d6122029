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

#include "ptraj/ti_model.h"

#include <array>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace ptraj {

using nn::Activation;
using nn::Vec;

TiModel::TiModel(OccupiedCellIndex cells, int hidden, int latent)
    : cells_(std::move(cells)), hidden_(hidden), latent_(latent) {
  const int n = cells_.size();
  enc1_ = layout_.AddDense("enc1", input_dim(), hidden_, Activation::kRelu);
  enc2_ = layout_.AddDense("enc2", hidden_, hidden_, Activation::kLinear);
  mean_ = layout_.AddDense("latent_mean", hidden_, latent_,
                           Activation::kLinear);
  log_var_ = layout_.AddDense("latent_log_var", hidden_, latent_,
                              Activation::kLinear);
  dec1_ = layout_.AddDense("dec1", latent_, hidden_, Activation::kRelu);
  head_src_ = layout_.AddDense("head_src", hidden_, n, Activation::kSoftmax);
  head_dst_ = layout_.AddDense("head_dst", hidden_, n, Activation::kSoftmax);
  head_hour_ = layout_.AddDense("head_hour", hidden_, kHoursPerDay,
                                Activation::kSoftmax);
  params_.assign(layout_.size(), 0.0);
}

absl::Status TiModel::SetParams(std::vector<double> params) {
  if (params.size() != layout_.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "TI expects %d parameters, got %d", layout_.size(), params.size()));
  }
  params_ = std::move(params);
  return absl::OkStatus();
}

void TiModel::Initialize(uint64_t seed) {
  Rng rng = DeriveRng(seed, RngStream::kInit, 1);
  params_ = nn::InitializeParams(layout_.specs(), rng);
}

absl::StatusOr<DenseTriple> TiModel::ToDense(const EndpointTriple& t) const {
  const std::optional<int32_t> src = cells_.Find(t.src);
  const std::optional<int32_t> dst = cells_.Find(t.dst);
  if (!src || !dst) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "cell %d not in the occupied-cell index",
        src ? t.dst.index : t.src.index));
  }
  if (!t.hour.valid()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("hour %d out of range", t.hour.hour));
  }
  return DenseTriple{*src, *dst, t.hour.hour};
}

absl::StatusOr<Vec> TiModel::EncodeInput(const EndpointTriple& t) const {
  absl::StatusOr<DenseTriple> d = ToDense(t);
  if (!d.ok()) return d.status();
  Vec x = Vec::Zero(input_dim());
  x[d->src] = 1.0;
  x[cells_.size() + d->dst] = 1.0;
  x[2 * cells_.size() + d->hour] = 1.0;
  return x;
}

void TiModel::Encode(std::span<const double> params, const DenseTriple& t,
                     Vec* mean, Vec* log_var) const {
  const std::array<int, 3> hot{t.src, cells_.size() + t.dst,
                               2 * cells_.size() + t.hour};
  const Vec h1 = nn::Relu(enc1_.PreactivationSparse(params, hot));
  const Vec h2 = enc2_.Preactivation(params, h1);
  *mean = mean_.Preactivation(params, h2);
  *log_var = log_var_.Preactivation(params, h2);
}

TiHeads TiModel::Decode(std::span<const double> params, const Vec& z) const {
  const Vec d1 = nn::Relu(dec1_.Preactivation(params, z));
  return {nn::Softmax(head_src_.Preactivation(params, d1)),
          nn::Softmax(head_dst_.Preactivation(params, d1)),
          nn::Softmax(head_hour_.Preactivation(params, d1))};
}

absl::StatusOr<double> TiModel::Loss(std::span<const double> params,
                                     const DenseTriple& t, const Vec& noise,
                                     std::span<double> grad) const {
  if (noise.size() != latent_) {
    return absl::InvalidArgumentError("noise size differs from latent size");
  }
  const std::array<int, 3> hot{t.src, cells_.size() + t.dst,
                               2 * cells_.size() + t.hour};
  // Forward.
  const Vec pre1 = enc1_.PreactivationSparse(params, hot);
  const Vec h1 = nn::Relu(pre1);
  const Vec h2 = enc2_.Preactivation(params, h1);
  const Vec mean = mean_.Preactivation(params, h2);
  const Vec log_var = log_var_.Preactivation(params, h2);
  const Vec z = nn::Reparameterize(mean, log_var, noise);
  const Vec pre_d = dec1_.Preactivation(params, z);
  const Vec d1 = nn::Relu(pre_d);
  const Vec p_src = nn::Softmax(head_src_.Preactivation(params, d1));
  const Vec p_dst = nn::Softmax(head_dst_.Preactivation(params, d1));
  const Vec p_hour = nn::Softmax(head_hour_.Preactivation(params, d1));

  const double kl = nn::KlStandardNormal(mean, log_var);
  const double loss = kl + *nn::CrossEntropy(p_src, t.src) +
                      *nn::CrossEntropy(p_dst, t.dst) +
                      *nn::CrossEntropy(p_hour, t.hour);
  if (!std::isfinite(loss)) {
    return absl::InternalError(absl::StrFormat(
        "numeric: TI loss is %g for triple (%d, %d, %d)", loss, t.src, t.dst,
        t.hour));
  }
  if (grad.empty()) return loss;

  // Backward.
  Vec dd1 = head_src_.Backward(params, d1,
                               nn::SoftmaxCrossEntropyGrad(p_src, t.src), grad);
  dd1 += head_dst_.Backward(params, d1,
                            nn::SoftmaxCrossEntropyGrad(p_dst, t.dst), grad);
  dd1 += head_hour_.Backward(
      params, d1, nn::SoftmaxCrossEntropyGrad(p_hour, t.hour), grad);
  const Vec dpre_d =
      (pre_d.array() > 0).select(dd1, Vec::Zero(dd1.size()));
  const Vec dz = dec1_.Backward(params, z, dpre_d, grad);

  const Vec std_dev = (0.5 * log_var).array().exp().matrix();
  // d/dmean: reparameterization passes dz through; KL contributes mean.
  const Vec dmean = dz + mean;
  // d/dlog_var: dz * noise * std/2 from z, (exp(log_var) - 1)/2 from KL.
  const Vec dlog_var =
      (dz.array() * noise.array() * std_dev.array() * 0.5 +
       0.5 * (log_var.array().exp() - 1.0))
          .matrix();
  Vec dh2 = mean_.Backward(params, h2, dmean, grad);
  dh2 += log_var_.Backward(params, h2, dlog_var, grad);
  const Vec dh1 = enc2_.Backward(params, h1, dh2, grad);
  const Vec dpre1 = (pre1.array() > 0).select(dh1, Vec::Zero(dh1.size()));
  enc1_.BackwardSparse(hot, dpre1, grad);
  return loss;
}

absl::StatusOr<double> TiModel::Loss(const EndpointTriple& t,
                                     const Vec& noise) const {
  absl::StatusOr<DenseTriple> d = ToDense(t);
  if (!d.ok()) return d.status();
  return Loss(params_, *d, noise);
}

EndpointTriple TiModel::Sample(Rng& rng) const {
  const Vec z = nn::StandardNormalVector(latent_, rng);
  const TiHeads heads = Decode(z);
  const int src = nn::SampleCategorical(heads.src, rng);
  const int dst = nn::SampleCategorical(heads.dst, rng);
  const int hour = nn::SampleCategorical(heads.hour, rng);
  return {cells_.cell(src), cells_.cell(dst), TimeSlot{hour}};
}

ModelFile TiModel::ToFile() const {
  ModelFile f;
  f.tag = "TI";
  f.metadata = metadata_;
  f.metadata["occupied"] = FormatCellList(cells_);
  f.layers = layout_.specs();
  f.params = params_;
  return f;
}

absl::StatusOr<TiModel> TiModel::FromFile(const ModelFile& file) {
  if (file.tag != "TI") {
    return absl::FailedPreconditionError(
        absl::StrCat("expected a TI model, found tag '", file.tag, "'"));
  }
  auto it = file.metadata.find("occupied");
  if (it == file.metadata.end()) {
    return absl::DataLossError("TI model lacks occupied-cell list");
  }
  absl::StatusOr<OccupiedCellIndex> cells = ParseCellList(it->second);
  if (!cells.ok()) return cells.status();
  if (file.layers.size() != 8) {
    return absl::DataLossError("TI model must have 8 layers");
  }
  TiModel model(*std::move(cells), file.layers[0].cols, file.layers[2].cols);
  if (model.layer_specs() != file.layers) {
    return absl::DataLossError("TI layer manifest does not match architecture");
  }
  absl::Status st = model.SetParams(file.params);
  if (!st.ok()) return st;
  model.metadata_ = file.metadata;
  model.metadata_.erase("occupied");
  return model;
}

std::vector<DenseTriple> TiTrainingRecords(const TiModel& model,
                                           const Dataset& dataset) {
  std::vector<DenseTriple> records;
  records.reserve(dataset.size());
  for (const Trajectory& t : dataset.trajectories) {
    // Every dataset cell is indexed when the model was built from it.
    absl::StatusOr<DenseTriple> d =
        model.ToDense({t.source(), t.destination(), t.hour});
    if (d.ok()) records.push_back(*d);
  }
  return records;
}

absl::StatusOr<TrainingReport> TrainTi(TiModel& model, const Dataset& dataset,
                                       const DpSgdConfig& cfg,
                                       PrivacyLedger* ledger) {
  const std::vector<DenseTriple> records = TiTrainingRecords(model, dataset);
  if (records.empty()) {
    return absl::FailedPreconditionError("TI training needs a non-empty dataset");
  }
  if (records.size() != dataset.size()) {
    return absl::FailedPreconditionError(
        "dataset contains cells missing from the TI occupied-cell index");
  }
  const int64_t n = static_cast<int64_t>(records.size());
  const double q =
      static_cast<double>(cfg.batch_size) / static_cast<double>(n);
  TrainingJob job;
  job.config = cfg;
  job.dataset_size = n;
  job.phase_name = "TI";
  job.ledger = ledger;
  job.sampler = [n, q](Rng& rng) { return SampleBatchPoisson(n, q, rng); };
  const int latent = model.latent();
  job.loss = [&model, &records, latent](std::span<const double> params,
                                        int64_t example, Rng& rng,
                                        std::span<double> grad) {
    const Vec noise = nn::StandardNormalVector(latent, rng);
    return model.Loss(params, records[example], noise, grad);
  };
  return RunDpSgd(job, model.mutable_params());
}

}  // namespace ptraj
