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

#include "ptraj/dataset.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace ptraj {
namespace {

constexpr absl::string_view kMagic = "#PTRAJ-DS";
constexpr absl::string_view kVersion = "v1";

absl::Status ParseHeader(absl::string_view line, DatasetHeader& header) {
  std::vector<absl::string_view> fields =
      absl::StrSplit(line, ' ', absl::SkipEmpty());
  if (fields.size() < 2 || fields[0] != kMagic || fields[1] != kVersion) {
    return absl::DataLossError(
        absl::StrCat("not a PTRAJ-DS v1 file; header: ", line));
  }
  bool have_rows = false, have_cols = false, have_cell = false;
  for (size_t i = 2; i < fields.size(); ++i) {
    std::pair<absl::string_view, absl::string_view> kv =
        absl::StrSplit(fields[i], absl::MaxSplits('=', 1));
    const auto& [key, value] = kv;
    bool ok = true;
    if (key == "rows") {
      ok = absl::SimpleAtoi(value, &header.rows);
      have_rows = true;
    } else if (key == "cols") {
      ok = absl::SimpleAtoi(value, &header.cols);
      have_cols = true;
    } else if (key == "cell") {
      ok = absl::SimpleAtod(value, &header.cell_size_m);
      have_cell = true;
    } else if (key == "synthetic") {
      header.synthetic = value == "1";
    }
    if (!ok) {
      return absl::DataLossError(
          absl::StrCat("bad header field '", fields[i], "'"));
    }
  }
  if (!have_rows || !have_cols || !have_cell || header.rows <= 0 ||
      header.cols <= 0 || !(header.cell_size_m > 0)) {
    return absl::DataLossError(
        absl::StrCat("header lacks valid rows/cols/cell: ", line));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateTrajectory(const Trajectory& t, const GridSpec& grid) {
  if (t.cells.size() < 2) {
    return absl::FailedPreconditionError(
        absl::StrFormat("trajectory has %d cells, need >= 2", t.cells.size()));
  }
  if (!t.hour.valid()) {
    return absl::FailedPreconditionError(
        absl::StrFormat("hour %d out of range", t.hour.hour));
  }
  for (size_t i = 0; i < t.cells.size(); ++i) {
    if (!grid.IsValid(t.cells[i])) {
      return absl::FailedPreconditionError(
          absl::StrFormat("cell %d outside grid", t.cells[i].index));
    }
    if (i > 0 && t.cells[i] == t.cells[i - 1]) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "consecutive duplicate cell %d at position %d", t.cells[i].index, i));
    }
  }
  return absl::OkStatus();
}

OccupiedCellIndex Dataset::OccupiedCells() const {
  std::vector<CellId> cells;
  for (const Trajectory& t : trajectories) {
    cells.insert(cells.end(), t.cells.begin(), t.cells.end());
  }
  return OccupiedCellIndex(std::move(cells));
}

std::string SerializeDataset(const Dataset& ds) {
  std::string out = absl::StrFormat("%s %s rows=%d cols=%d cell=%s", kMagic,
                                    kVersion, ds.header.rows, ds.header.cols,
                                    absl::StrCat(ds.header.cell_size_m));
  if (ds.header.synthetic) absl::StrAppend(&out, " synthetic=1");
  out.push_back('\n');
  for (const Trajectory& t : ds.trajectories) {
    absl::StrAppend(&out, t.hour.hour, "\t");
    for (size_t i = 0; i < t.cells.size(); ++i) {
      if (i > 0) out.push_back(',');
      absl::StrAppend(&out, t.cells[i].index);
    }
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<Dataset> ParseDataset(absl::string_view text) {
  Dataset ds;
  bool seen_header = false;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    line = absl::StripSuffix(line, "\r");
    if (line.empty()) continue;
    if (!seen_header) {
      absl::Status st = ParseHeader(line, ds.header);
      if (!st.ok()) return st;
      seen_header = true;
      continue;
    }
    std::pair<absl::string_view, absl::string_view> parts =
        absl::StrSplit(line, absl::MaxSplits('\t', 1));
    Trajectory t;
    if (!absl::SimpleAtoi(parts.first, &t.hour.hour) || !t.hour.valid()) {
      return absl::DataLossError(
          absl::StrFormat("line %d: bad hour '%s'", line_no, parts.first));
    }
    for (absl::string_view c : absl::StrSplit(parts.second, ',')) {
      CellId cell;
      if (!absl::SimpleAtoi(c, &cell.index)) {
        return absl::DataLossError(
            absl::StrFormat("line %d: bad cell '%s'", line_no, c));
      }
      t.cells.push_back(cell);
    }
    const int64_t universe =
        static_cast<int64_t>(ds.header.rows) * ds.header.cols;
    for (CellId c : t.cells) {
      if (c.index < 0 || c.index >= universe) {
        return absl::DataLossError(absl::StrFormat(
            "line %d: cell %d outside %dx%d grid", line_no, c.index,
            ds.header.rows, ds.header.cols));
      }
    }
    if (t.cells.size() < 2) {
      return absl::DataLossError(
          absl::StrFormat("line %d: trajectory shorter than 2 cells", line_no));
    }
    for (size_t i = 1; i < t.cells.size(); ++i) {
      if (t.cells[i] == t.cells[i - 1]) {
        return absl::DataLossError(
            absl::StrFormat("line %d: repeated consecutive cell", line_no));
      }
    }
    ds.trajectories.push_back(std::move(t));
  }
  if (!seen_header) return absl::DataLossError("empty dataset file");
  return ds;
}

std::string FormatCellList(const OccupiedCellIndex& cells) {
  return absl::StrJoin(cells.cells(), ",", [](std::string* out, CellId c) {
    absl::StrAppend(out, c.index);
  });
}

absl::StatusOr<OccupiedCellIndex> ParseCellList(absl::string_view text) {
  std::vector<CellId> cells;
  for (absl::string_view s : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    CellId c;
    if (!absl::SimpleAtoi(s, &c.index)) {
      return absl::DataLossError(absl::StrCat("bad cell id '", s, "'"));
    }
    cells.push_back(c);
  }
  if (cells.empty()) return absl::DataLossError("empty cell list");
  return OccupiedCellIndex(std::move(cells));
}

absl::Status WriteFileAtomically(const std::string& path,
                                 absl::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return absl::NotFoundError(absl::StrCat("cannot write ", tmp));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) return absl::DataLossError(absl::StrCat("short write ", tmp));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    return absl::DataLossError(
        absl::StrCat("rename ", tmp, " -> ", path, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteDatasetFile(const std::string& path, const Dataset& ds) {
  return WriteFileAtomically(path, SerializeDataset(ds));
}

absl::StatusOr<Dataset> ReadDatasetFile(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  return ParseDataset(*text);
}

absl::Status CheckGridMatch(const DatasetHeader& header, const GridSpec& grid) {
  if (header.rows != grid.n_rows() || header.cols != grid.n_cols() ||
      std::abs(header.cell_size_m - grid.cell_size_m()) > 1e-9) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "grid mismatch: dataset %dx%d@%gm vs configured %dx%d@%gm",
        header.rows, header.cols, header.cell_size_m, grid.n_rows(),
        grid.n_cols(), grid.cell_size_m()));
  }
  return absl::OkStatus();
}

LengthStats ComputeLengthStats(const std::vector<Trajectory>& trajectories) {
  LengthStats s;
  s.count = trajectories.size();
  if (s.count == 0) return s;
  double sum = 0;
  for (const Trajectory& t : trajectories) {
    s.max_length = std::max(s.max_length, t.cells.size());
    sum += static_cast<double>(t.cells.size());
  }
  s.mean_length = sum / static_cast<double>(s.count);
  double ss = 0;
  for (const Trajectory& t : trajectories) {
    const double d = static_cast<double>(t.cells.size()) - s.mean_length;
    ss += d * d;
  }
  s.stddev_length = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

}  // namespace ptraj
