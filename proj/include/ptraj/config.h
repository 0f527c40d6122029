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

// Run configuration: a flat UTF-8 text file of `key = value` lines with '#'
// comments. Unknown keys are errors. Every key has a default, so an empty
// file is a valid configuration.

#ifndef PTRAJ_CONFIG_H_
#define PTRAJ_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "ptraj/dp_sgd.h"
#include "ptraj/geo_grid.h"
#include "ptraj/preprocess.h"

namespace ptraj {

struct RunConfig {
  // Grid. When grid_rows and grid_cols are both > 0 the box is ignored and
  // a rows x cols grid anchored at (0, 0) is used.
  double lat_min = 37.6017;
  double lat_max = 37.8112;
  double lon_min = -122.5158;
  double lon_max = -122.3527;
  double cell_size_m = 500.0;
  int32_t grid_rows = 0;
  int32_t grid_cols = 0;

  // Preprocessing.
  double max_speed_kmh = 150.0;
  int64_t aggregation_window_s = 60;
  int64_t gap_split_s = 300;
  int64_t utc_offset_s = -7 * 3600;
  std::string holiday_file;

  // Models.
  int32_t radius = 5;
  int ti_hidden = 100;
  int ti_latent = 50;
  int tpg_embedding = 50;
  int tpg_hidden = 200;
  DpSgdConfig ti = {1.0, 1.3, 200, 0.2, 15, 0, 1};
  DpSgdConfig tpg = {3.0, 1.3, 200, 0.1, 15, 0, 1};
  // Unset means 1 / |D|.
  std::optional<double> delta;

  // Run.
  uint64_t seed = 0;
  int threads = 1;
  int64_t generate_count = 0;  // 0 means |D| from the TI model
  int emd_cap = 2000;
  std::vector<int> tpr_k = {10, 20, 50, 100};

  // Paths. Empty paths resolve to fixed names inside out_dir.
  std::string out_dir = ".";
  std::string raw_dir;
  std::string dataset;
  std::string ti_model;
  std::string tpg_model;
  std::string synthetic;
  std::string ledger;
  std::string report;

  absl::StatusOr<GridSpec> Grid() const;
  PreprocessOptions Preprocess() const;
  NeighborhoodSpec Neighborhood() const { return NeighborhoodSpec{radius}; }

  std::string DatasetPath() const;
  std::string TiModelPath() const;
  std::string TpgModelPath() const;
  std::string SyntheticPath() const;
  std::string LedgerPath() const;
  std::string ReportPath() const;
  std::string InOut(absl::string_view name) const;
};

// Parses config text on top of the defaults.
absl::StatusOr<RunConfig> ParseConfig(absl::string_view text);
absl::StatusOr<RunConfig> ReadConfigFile(const std::string& path);

// Sets one key from its text value.
absl::Status SetConfigValue(RunConfig& config, absl::string_view key,
                            absl::string_view value);

// Range checks that do not depend on the dataset.
absl::Status ValidateConfig(const RunConfig& config);

// Every key in a fixed order, one `key = value` line each. Parsing the
// output reproduces the configuration.
std::string SerializeConfig(const RunConfig& config);

// FNV-1a hash of SerializeConfig, as 16 hex digits.
std::string ConfigHash(const RunConfig& config);

// Known keys, in serialization order.
std::vector<std::string> ConfigKeys();

}  // namespace ptraj

#endif  // PTRAJ_CONFIG_H_
