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

#ifndef PTRAJ_DATASET_H_
#define PTRAJ_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "ptraj/geo_grid.h"

namespace ptraj {

// A trip after preprocessing: cell visits in order, all stamped with one
// hour-of-day slot.
struct Trajectory {
  std::vector<CellId> cells;
  TimeSlot hour;

  CellId source() const { return cells.front(); }
  CellId destination() const { return cells.back(); }
  bool operator==(const Trajectory&) const = default;
};

// Length >= 2, valid hour, valid cells, no consecutive duplicates.
absl::Status ValidateTrajectory(const Trajectory& t, const GridSpec& grid);

// Grid layout as recorded in a dataset file header.
struct DatasetHeader {
  int32_t rows = 0;
  int32_t cols = 0;
  double cell_size_m = 0;
  bool synthetic = false;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Trajectory> trajectories;

  size_t size() const { return trajectories.size(); }
  // Cells appearing anywhere in the dataset.
  OccupiedCellIndex OccupiedCells() const;
};

// Text form, one trajectory per line:
//   #PTRAJ-DS v1 rows=<n> cols=<m> cell=<meters>[ synthetic=1]
//   <hour>\t<cell0>,<cell1>,...
std::string SerializeDataset(const Dataset& ds);
absl::StatusOr<Dataset> ParseDataset(absl::string_view text);

absl::Status WriteDatasetFile(const std::string& path, const Dataset& ds);
absl::StatusOr<Dataset> ReadDatasetFile(const std::string& path);

// Errors unless the dataset header matches the grid's dimensions and pitch.
absl::Status CheckGridMatch(const DatasetHeader& header, const GridSpec& grid);

// Comma-separated cell ids, as stored in model manifests.
std::string FormatCellList(const OccupiedCellIndex& cells);
absl::StatusOr<OccupiedCellIndex> ParseCellList(absl::string_view text);

// Writes `contents` to `path` via a temporary file and rename.
absl::Status WriteFileAtomically(const std::string& path,
                                 absl::string_view contents);
absl::StatusOr<std::string> ReadFileToString(const std::string& path);

struct LengthStats {
  size_t count = 0;
  size_t max_length = 0;
  double mean_length = 0;
  double stddev_length = 0;  // population standard deviation
};
LengthStats ComputeLengthStats(const std::vector<Trajectory>& trajectories);

}  // namespace ptraj

#endif  // PTRAJ_DATASET_H_
