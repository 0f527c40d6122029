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

#include "ptraj/commands.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "ptraj/dataset.h"
#include "ptraj/metrics.h"
#include "ptraj/model_io.h"
#include "ptraj/preprocess.h"
#include "ptraj/rng.h"
#include "ptraj/status_macros.h"
#include "ptraj/ti_model.h"
#include "ptraj/tpg_model.h"
#include "ptraj/trace_generator.h"

namespace ptraj {
namespace {

namespace fs = std::filesystem;

using Manifest = std::vector<std::pair<std::string, std::string>>;

absl::Status EnsureOutDir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) {
    return absl::FailedPreconditionError(absl::StrCat(
        "cannot create output directory ", config.out_dir, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status WriteRunManifest(const RunConfig& config, absl::string_view command,
                              const Manifest& entries) {
  std::string text = absl::StrCat("command=", command, "\nversion=", kVersion,
                                  "\nconfig_hash=", ConfigHash(config),
                                  "\nseed=", config.seed, "\nti_seed=",
                                  TiSeed(config.seed), "\ntpg_seed=",
                                  TpgSeed(config.seed), "\n");
  for (const auto& [k, v] : entries) absl::StrAppend(&text, k, "=", v, "\n");
  absl::StrAppend(&text, "[config]\n", SerializeConfig(config));
  return WriteFileAtomically(
      config.InOut(absl::StrCat("run_manifest.", command, ".txt")), text);
}

absl::StatusOr<GridSpec> ConfiguredGrid(const RunConfig& config) {
  PTRAJ_RETURN_IF_ERROR(ValidateConfig(config));
  absl::StatusOr<GridSpec> grid = config.Grid();
  if (!grid.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: ", grid.status().message()));
  }
  return grid;
}

std::map<std::string, std::string> GridMetadata(const GridSpec& grid) {
  return {{"grid_rows", absl::StrCat(grid.n_rows())},
          {"grid_cols", absl::StrCat(grid.n_cols())},
          {"cell_size_m", absl::StrFormat("%.17g", grid.cell_size_m())}};
}

absl::Status CheckModelGrid(const std::map<std::string, std::string>& meta,
                            const GridSpec& grid, absl::string_view which) {
  for (const auto& [k, v] : GridMetadata(grid)) {
    auto it = meta.find(k);
    if (it == meta.end()) {
      return absl::DataLossError(
          absl::StrCat(which, " model lacks grid field ", k));
    }
    if (k == "cell_size_m") {
      double a = 0, b = 0;
      if (!absl::SimpleAtod(it->second, &a) || !absl::SimpleAtod(v, &b) ||
          std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b))) {
        return absl::FailedPreconditionError(absl::StrCat(
            which, " model cell size ", it->second, " differs from grid ", v));
      }
    } else if (it->second != v) {
      return absl::FailedPreconditionError(absl::StrCat(
          which, " model ", k, "=", it->second, " differs from grid ", v));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ReadGridDataset(const std::string& path,
                                        const GridSpec& grid) {
  PTRAJ_ASSIGN_OR_RETURN(Dataset ds, ReadDatasetFile(path));
  PTRAJ_RETURN_IF_ERROR(CheckGridMatch(ds.header, grid));
  return ds;
}

std::string FormatEpsilon(const PrivacySpend& spend) {
  if (std::isinf(spend.epsilon)) return "epsilon=inf lambda=-";
  return absl::StrFormat("epsilon=%.4f lambda=%d", spend.epsilon, spend.lambda);
}

std::string Join(const std::vector<std::string>& parts) {
  return absl::StrJoin(parts, ",");
}

}  // namespace

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return 0;
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
      return 2;
    case absl::StatusCode::kInternal:
      return absl::StrContains(status.message(), "numeric") ? 4 : 3;
    default:
      return 3;
  }
}

uint64_t TiSeed(uint64_t seed) { return Fnv1a64("ti", seed); }
uint64_t TpgSeed(uint64_t seed) { return Fnv1a64("tpg", seed); }

absl::Status RunPreprocess(const RunConfig& config, const CommandIo& io) {
  PTRAJ_ASSIGN_OR_RETURN(GridSpec grid, ConfiguredGrid(config));
  if (config.raw_dir.empty()) {
    return absl::InvalidArgumentError("config: raw_dir is not set");
  }
  PreprocessOptions options = config.Preprocess();
  if (!config.holiday_file.empty()) {
    absl::StatusOr<std::string> text = ReadFileToString(config.holiday_file);
    if (!text.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config: cannot read holiday_file: ", text.status().message()));
    }
    PTRAJ_ASSIGN_OR_RETURN(options.blacklist_dates, ParseDateBlacklist(*text));
  }

  std::error_code ec;
  std::vector<fs::path> files;
  for (fs::directory_iterator it(config.raw_dir, ec), end; !ec && it != end;
       it.increment(ec)) {
    const std::string name = it->path().filename().string();
    if (name.empty() || name[0] == '_' || name[0] == '.') continue;
    if (it->is_regular_file()) files.push_back(it->path());
  }
  if (ec) {
    return absl::NotFoundError(absl::StrCat("cannot list raw_dir ",
                                            config.raw_dir, ": ", ec.message()));
  }
  if (files.empty()) {
    return absl::NotFoundError(
        absl::StrCat("no raw trace files in ", config.raw_dir));
  }
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.header = {grid.n_rows(), grid.n_cols(), grid.cell_size_m(), false};
  PreprocessStats stats;
  for (const fs::path& file : files) {
    PTRAJ_ASSIGN_OR_RETURN(std::string contents,
                           ReadFileToString(file.string()));
    PTRAJ_ASSIGN_OR_RETURN(
        std::vector<RawPoint> points,
        ParseCabspottingFile(contents, file.stem().string(), &stats));
    PreprocessTaxi(points, grid, options, &ds.trajectories, &stats);
  }
  if (ds.trajectories.empty()) {
    return absl::FailedPreconditionError(
        "preprocessing produced no trajectories");
  }

  const LengthStats len = ComputeLengthStats(ds.trajectories);
  std::string report = absl::StrFormat(
      "trajectories=%d\noccupied_cells=%d\nmax_length=%d\nmean_length=%.4f\n"
      "stddev_length=%.4f\nraw_files=%d\nraw_points=%d\nraw_trips=%d\n"
      "gap_splits=%d\n",
      ds.size(), ds.OccupiedCells().size(), len.max_length, len.mean_length,
      len.stddev_length, files.size(), stats.raw_points, stats.raw_trips,
      stats.gap_splits);
  for (const auto& [reason, n] : stats.drops) {
    absl::StrAppend(&report, "drop.", DropReasonName(reason), "=", n, "\n");
  }

  PTRAJ_RETURN_IF_ERROR(EnsureOutDir(config));
  const std::string path = config.DatasetPath();
  PTRAJ_RETURN_IF_ERROR(WriteDatasetFile(path, ds));
  PTRAJ_RETURN_IF_ERROR(WriteFileAtomically(path + ".stats", report));
  PTRAJ_RETURN_IF_ERROR(WriteRunManifest(
      config, "preprocess",
      {{"input", config.raw_dir}, {"outputs", Join({path, path + ".stats"})}}));
  *io.out << report;
  return absl::OkStatus();
}

absl::StatusOr<TrainTarget> ParseTrainTarget(absl::string_view text) {
  const std::string t = absl::AsciiStrToLower(text);
  if (t == "ti") return TrainTarget::kTi;
  if (t == "tpg") return TrainTarget::kTpg;
  if (t == "both") return TrainTarget::kBoth;
  return absl::InvalidArgumentError(
      absl::StrCat("train target must be TI, TPG or both, got '", text, "'"));
}

absl::Status RunTrain(const RunConfig& config, TrainTarget target,
                      const CommandIo& io) {
  PTRAJ_ASSIGN_OR_RETURN(GridSpec grid, ConfiguredGrid(config));
  PTRAJ_ASSIGN_OR_RETURN(Dataset ds,
                         ReadGridDataset(config.DatasetPath(), grid));
  if (ds.header.synthetic) {
    *io.log << "warning: training on a dataset marked synthetic\n";
  }
  if (ds.trajectories.empty()) {
    return absl::FailedPreconditionError("training dataset is empty");
  }
  const int64_t n = static_cast<int64_t>(ds.size());
  const double delta = config.delta.value_or(1.0 / static_cast<double>(n));
  const OccupiedCellIndex occupied = ds.OccupiedCells();
  PTRAJ_RETURN_IF_ERROR(EnsureOutDir(config));

  PrivacyLedger ledger;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> meta = GridMetadata(grid);
  meta["n_train"] = absl::StrCat(n);
  meta["config_hash"] = ConfigHash(config);

  if (target != TrainTarget::kTpg) {
    DpSgdConfig cfg = config.ti;
    cfg.seed = TiSeed(config.seed);
    cfg.threads = config.threads;
    TiModel model(occupied, config.ti_hidden, config.ti_latent);
    model.Initialize(cfg.seed);
    *io.log << "training TI on " << n << " trajectories\n";
    PTRAJ_ASSIGN_OR_RETURN(TrainingReport report,
                           TrainTi(model, ds, cfg, &ledger));
    model.metadata() = meta;
    model.metadata()["steps"] = absl::StrCat(report.steps);
    PTRAJ_RETURN_IF_ERROR(
        WriteModelFile(config.TiModelPath(), model.ToFile()));
    outputs.push_back(config.TiModelPath());
    *io.out << absl::StrFormat("ti_steps=%d ti_final_loss=%.6f\n",
                               report.steps,
                               report.epoch_mean_loss.empty()
                                   ? std::nan("")
                                   : report.epoch_mean_loss.back());
  }
  if (target != TrainTarget::kTi) {
    DpSgdConfig cfg = config.tpg;
    cfg.seed = TpgSeed(config.seed);
    cfg.threads = config.threads;
    TpgModel model(occupied, config.Neighborhood(), config.tpg_embedding,
                   config.tpg_hidden);
    model.Initialize(cfg.seed);
    *io.log << "training TPG on " << n << " trajectories\n";
    PTRAJ_ASSIGN_OR_RETURN(TpgTrainingResult result,
                           TrainTpg(model, ds, grid, cfg, &ledger));
    model.metadata() = meta;
    model.metadata()["steps"] = absl::StrCat(result.report.steps);
    PTRAJ_RETURN_IF_ERROR(
        WriteModelFile(config.TpgModelPath(), model.ToFile()));
    outputs.push_back(config.TpgModelPath());
    *io.out << absl::StrFormat(
        "tpg_steps=%d tpg_accuracy=%.4f tpg_mean_error_m=%.2f\n",
        result.report.steps, result.diagnostics.accuracy,
        result.diagnostics.mean_error_m);
  }

  const PrivacySpend spend = ledger.EpsilonForDelta(delta);
  PTRAJ_RETURN_IF_ERROR(
      WriteFileAtomically(config.LedgerPath(), ledger.Serialize(delta)));
  outputs.push_back(config.LedgerPath());
  if (ledger.non_private()) {
    *io.log << "warning: NON-PRIVATE run (noise multiplier 0)\n";
  }
  *io.out << FormatEpsilon(spend) << absl::StrFormat(" delta=%g\n", delta);
  return WriteRunManifest(config, "train",
                          {{"input", config.DatasetPath()},
                           {"outputs", Join(outputs)},
                           {"epsilon", FormatEpsilon(spend)}});
}

absl::Status RunGenerate(const RunConfig& config, std::optional<int64_t> count,
                         const CommandIo& io) {
  PTRAJ_ASSIGN_OR_RETURN(GridSpec grid, ConfiguredGrid(config));
  PTRAJ_ASSIGN_OR_RETURN(ModelFile ti_file,
                         ReadModelFile(config.TiModelPath()));
  PTRAJ_ASSIGN_OR_RETURN(ModelFile tpg_file,
                         ReadModelFile(config.TpgModelPath()));
  PTRAJ_ASSIGN_OR_RETURN(TiModel ti, TiModel::FromFile(ti_file));
  PTRAJ_ASSIGN_OR_RETURN(TpgModel tpg, TpgModel::FromFile(tpg_file));
  PTRAJ_RETURN_IF_ERROR(CheckModelGrid(ti.metadata(), grid, "TI"));
  PTRAJ_RETURN_IF_ERROR(CheckModelGrid(tpg.metadata(), grid, "TPG"));

  GenerateOptions options;
  options.seed = config.seed;
  options.threads = config.threads;
  if (count) {
    options.count = *count;
  } else if (config.generate_count > 0) {
    options.count = config.generate_count;
  } else {
    auto it = ti.metadata().find("n_train");
    if (it == ti.metadata().end() ||
        !absl::SimpleAtoi(it->second, &options.count)) {
      return absl::DataLossError("TI model does not record n_train");
    }
  }
  if (options.count < 0) {
    return absl::InvalidArgumentError("generate count must be >= 0");
  }

  GenerateReport report;
  PTRAJ_ASSIGN_OR_RETURN(Dataset synthetic,
                         GenerateSynthetic(ti, tpg, grid, options, &report));
  PTRAJ_RETURN_IF_ERROR(EnsureOutDir(config));
  PTRAJ_RETURN_IF_ERROR(WriteDatasetFile(config.SyntheticPath(), synthetic));
  const std::string counters = absl::StrFormat(
      "generated=%d skipped=%d same_endpoint_resamples=%d "
      "no_path_resamples=%d",
      report.generated, report.skipped, report.same_endpoint_resamples,
      report.no_path_resamples);
  if (report.retry_warning) {
    *io.log << "warning: more than 1% of draws exhausted their retries\n";
  }
  *io.out << counters << "\n";
  return WriteRunManifest(
      config, "generate",
      {{"inputs", Join({config.TiModelPath(), config.TpgModelPath()})},
       {"outputs", config.SyntheticPath()},
       {"count", absl::StrCat(options.count)},
       {"counters", counters}});
}

absl::Status RunEvaluate(const RunConfig& config, const std::string& original,
                         const std::string& synthetic, const CommandIo& io) {
  PTRAJ_ASSIGN_OR_RETURN(GridSpec grid, ConfiguredGrid(config));
  PTRAJ_ASSIGN_OR_RETURN(Dataset a, ReadGridDataset(original, grid));
  PTRAJ_ASSIGN_OR_RETURN(Dataset b, ReadGridDataset(synthetic, grid));
  EvaluationOptions options;
  options.k_values = config.tpr_k;
  options.emd_cap = config.emd_cap;
  options.seed = config.seed;
  PTRAJ_ASSIGN_OR_RETURN(std::vector<MetricLine> lines,
                         EvaluateAll(a, b, grid, options));
  const std::string report = FormatReport(lines);
  PTRAJ_RETURN_IF_ERROR(EnsureOutDir(config));
  PTRAJ_RETURN_IF_ERROR(WriteFileAtomically(config.ReportPath(), report));
  *io.out << report;
  return WriteRunManifest(config, "evaluate",
                          {{"inputs", Join({original, synthetic})},
                           {"outputs", config.ReportPath()}});
}

absl::StatusOr<PrivacySpend> RunAccountant(const AccountantQuery& q,
                                           const CommandIo& io) {
  if (q.dataset_size < 1) {
    return absl::InvalidArgumentError("dataset size must be >= 1");
  }
  const double delta =
      q.delta.value_or(1.0 / static_cast<double>(q.dataset_size));
  PTRAJ_ASSIGN_OR_RETURN(
      PrivacySpend spend,
      ComputeEpsilon(q.dataset_size, q.batch_size, q.sigma, q.epochs, delta));
  *io.out << FormatEpsilon(spend) << "\n";
  return spend;
}

}  // namespace ptraj
