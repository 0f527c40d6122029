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

// Subcommand implementations behind the command-line tool. Each command
// writes its outputs atomically and leaves a run manifest next to them.

#ifndef PTRAJ_COMMANDS_H_
#define PTRAJ_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ptraj/accountant.h"
#include "ptraj/config.h"

namespace ptraj {

inline constexpr char kVersion[] = "ptraj 1.0.0";

// Process exit code for a command status: 0 success, 2 configuration
// error, 3 data error, 4 numeric failure.
int ExitCodeFor(const absl::Status& status);

// Human-readable progress goes to `log`; machine-readable results to `out`.
struct CommandIo {
  std::ostream* out;
  std::ostream* log;
};

// Reads every regular file in raw_dir (names starting with '_' or '.' are
// skipped; the file stem is the taxi id) and writes the processed dataset
// plus a `<dataset>.stats` report.
absl::Status RunPreprocess(const RunConfig& config, const CommandIo& io);

enum class TrainTarget { kTi, kTpg, kBoth };
absl::StatusOr<TrainTarget> ParseTrainTarget(absl::string_view text);

// Trains the requested models and writes them with the privacy ledger.
absl::Status RunTrain(const RunConfig& config, TrainTarget target,
                      const CommandIo& io);

// Samples synthetic trajectories from the two model files. Never opens
// the training dataset. `count` overrides the configured count; when both
// are unset the TI model's recorded training-set size is used.
absl::Status RunGenerate(const RunConfig& config, std::optional<int64_t> count,
                         const CommandIo& io);

// Compares two datasets and writes the metric report.
absl::Status RunEvaluate(const RunConfig& config, const std::string& original,
                         const std::string& synthetic, const CommandIo& io);

struct AccountantQuery {
  int64_t dataset_size = 0;
  int64_t batch_size = 200;
  double sigma = 1.3;
  int64_t epochs = 30;
  std::optional<double> delta;  // defaults to 1 / dataset_size
};

// Prints `epsilon=<v> lambda=<k>`.
absl::StatusOr<PrivacySpend> RunAccountant(const AccountantQuery& query,
                                           const CommandIo& io);

// Seeds the two DP-SGD runs from the run seed.
uint64_t TiSeed(uint64_t seed);
uint64_t TpgSeed(uint64_t seed);

}  // namespace ptraj

#endif  // PTRAJ_COMMANDS_H_
