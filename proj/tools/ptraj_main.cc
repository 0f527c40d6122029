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

// Command-line front end:
//
//   ptraj [--config F] [--seed N] [--out DIR] [--set key=value]... <command>
//
//   preprocess [--raw-dir DIR]
//   train [--which TI|TPG|both]
//   generate [-n COUNT]
//   evaluate [--original F] [--synthetic F]
//   accountant --dataset-size N [--batch-size B] [--sigma S] [--epochs E]
//              [--delta D]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ptraj/commands.h"
#include "ptraj/config.h"

namespace {

int Fail(const absl::Status& status) {
  std::cerr << "ptraj: " << status << "\n";
  return ptraj::ExitCodeFor(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthetic trajectory generator"};
  app.set_version_flag("--version", ptraj::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Run seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--set", overrides, "Override a config key (key=value)");

  auto* preprocess = app.add_subcommand("preprocess", "Build the dataset");
  std::string raw_dir;
  preprocess->add_option("--raw-dir", raw_dir, "Directory of raw trace files");

  auto* train = app.add_subcommand("train", "Train models with DP-SGD");
  std::string which = "both";
  train->add_option("--which", which, "TI, TPG or both");

  auto* generate = app.add_subcommand("generate", "Sample synthetic data");
  std::optional<int64_t> count;
  generate->add_option("-n,--count", count, "Trajectories to generate");

  auto* evaluate = app.add_subcommand("evaluate", "Compare two datasets");
  std::string original, synthetic;
  evaluate->add_option("--original", original, "Original dataset");
  evaluate->add_option("--synthetic", synthetic, "Synthetic dataset");

  auto* accountant = app.add_subcommand("accountant", "Privacy spend query");
  ptraj::AccountantQuery query;
  std::optional<double> delta;
  accountant->add_option("--dataset-size", query.dataset_size, "|D|")
      ->required();
  accountant->add_option("--batch-size", query.batch_size, "Batch size");
  accountant->add_option("--sigma", query.sigma, "Noise multiplier");
  accountant->add_option("--epochs", query.epochs, "Epochs");
  accountant->add_option("--delta", delta, "Target delta (default 1/|D|)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const ptraj::CommandIo io{&std::cout, &std::cerr};
  if (accountant->parsed()) {
    query.delta = delta;
    absl::StatusOr<ptraj::PrivacySpend> spend = ptraj::RunAccountant(query, io);
    return spend.ok() ? 0 : Fail(spend.status());
  }

  ptraj::RunConfig config;
  if (!config_path.empty()) {
    absl::StatusOr<ptraj::RunConfig> parsed =
        ptraj::ReadConfigFile(config_path);
    if (!parsed.ok()) return Fail(parsed.status());
    config = *std::move(parsed);
  }
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("--set expects key=value, got '", kv, "'")));
    }
    absl::Status st =
        ptraj::SetConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
    if (!st.ok()) return Fail(st);
  }
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  if (!out_dir.empty()) config.out_dir = out_dir;

  absl::Status status;
  if (preprocess->parsed()) {
    if (!raw_dir.empty()) config.raw_dir = raw_dir;
    status = ptraj::RunPreprocess(config, io);
  } else if (train->parsed()) {
    absl::StatusOr<ptraj::TrainTarget> target = ptraj::ParseTrainTarget(which);
    status = target.ok() ? ptraj::RunTrain(config, *target, io)
                         : target.status();
  } else if (generate->parsed()) {
    status = ptraj::RunGenerate(config, count, io);
  } else if (evaluate->parsed()) {
    status = ptraj::RunEvaluate(
        config, original.empty() ? config.DatasetPath() : original,
        synthetic.empty() ? config.SyntheticPath() : synthetic, io);
  }
  return status.ok() ? 0 : Fail(status);
}
