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

// Uniform grid over a lat/lon bounding box. Row 0 is the northern edge and
// column 0 the western edge; cell index = row * n_cols + col. All distance
// math uses an equirectangular projection fixed at the box's mid-latitude.

#ifndef PTRAJ_GEO_GRID_H_
#define PTRAJ_GEO_GRID_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace ptraj {

inline constexpr double kEarthRadiusMeters = 6371008.8;
inline constexpr int kHoursPerDay = 24;

struct CellId {
  int32_t index = 0;
  auto operator<=>(const CellId&) const = default;
};

struct CellCoord {
  int32_t row = 0;
  int32_t col = 0;
  auto operator<=>(const CellCoord&) const = default;
};

struct LatLon {
  double lat = 0;
  double lon = 0;
};

struct TimeSlot {
  int32_t hour = 0;
  auto operator<=>(const TimeSlot&) const = default;
  bool valid() const { return hour >= 0 && hour < kHoursPerDay; }
};

class GridSpec {
 public:
  // Builds the full rectangle covering the box with square cells of
  // `cell_size_m` meters. Partial cells on the south/east edges are kept.
  static absl::StatusOr<GridSpec> Create(double lat_min, double lat_max,
                                         double lon_min, double lon_max,
                                         double cell_size_m);

  // A grid of exactly rows x cols cells anchored at (0N, 0E). Used for
  // datasets that carry only grid dimensions and for synthetic corpora.
  static absl::StatusOr<GridSpec> ForDimensions(int32_t rows, int32_t cols,
                                                double cell_size_m);

  double lat_min() const { return lat_min_; }
  double lat_max() const { return lat_max_; }
  double lon_min() const { return lon_min_; }
  double lon_max() const { return lon_max_; }
  double cell_size_m() const { return cell_size_m_; }
  int32_t n_rows() const { return n_rows_; }
  int32_t n_cols() const { return n_cols_; }
  int32_t universe_size() const { return n_rows_ * n_cols_; }

  bool Contains(double lat, double lon) const;
  bool IsValid(CellId cell) const {
    return cell.index >= 0 && cell.index < universe_size();
  }
  bool IsValid(CellCoord c) const {
    return c.row >= 0 && c.row < n_rows_ && c.col >= 0 && c.col < n_cols_;
  }
  CellCoord ToCoord(CellId cell) const {
    return {cell.index / n_cols_, cell.index % n_cols_};
  }
  CellId ToCell(CellCoord c) const { return {c.row * n_cols_ + c.col}; }

  // Local projection: meters east of lon_min / south of lat_max.
  double EastMeters(double lon) const {
    return (lon - lon_min_) * meters_per_deg_lon_;
  }
  double SouthMeters(double lat) const {
    return (lat_max_ - lat) * meters_per_deg_lat_;
  }
  // Euclidean distance between two points in the local projection.
  double DistanceMeters(LatLon a, LatLon b) const;

  LatLon CellCenter(CellId cell) const;

  // Same dimensions and cell pitch.
  bool SameLayout(const GridSpec& other) const;

 private:
  GridSpec() = default;

  double lat_min_ = 0, lat_max_ = 0, lon_min_ = 0, lon_max_ = 0;
  double cell_size_m_ = 0;
  int32_t n_rows_ = 0, n_cols_ = 0;
  double meters_per_deg_lat_ = 0, meters_per_deg_lon_ = 0;
};

// Maps a point in the box to its covering cell. Out-of-box points yield
// OutOfRange.
absl::StatusOr<CellId> Snap(double lat, double lon, const GridSpec& grid);

// Euclidean distance between cell centers.
double CellDistanceMeters(CellId a, CellId b, const GridSpec& grid);

inline int32_t ChebyshevDistance(CellCoord a, CellCoord b) {
  const int32_t dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const int32_t dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return dr > dc ? dr : dc;
}

// Chebyshev neighborhood of radius s; classes enumerate the (2s+1)^2
// offsets row-major starting at (-s, -s).
struct NeighborhoodSpec {
  int32_t radius = 5;

  int32_t side() const { return 2 * radius + 1; }
  int32_t class_count() const { return side() * side(); }
  int32_t center_class() const { return radius * side() + radius; }
  int32_t ClassFor(int32_t d_row, int32_t d_col) const {
    return (d_row + radius) * side() + (d_col + radius);
  }
  CellCoord OffsetFor(int32_t cls) const {
    return {cls / side() - radius, cls % side() - radius};
  }
};

// Class index of `to` relative to `from`. NotNeighbor (InvalidArgument) if
// the Chebyshev distance exceeds the radius.
absl::StatusOr<int32_t> RelativeOffset(CellId from, CellId to,
                                       const NeighborhoodSpec& nb,
                                       const GridSpec& grid);

// Inverse of RelativeOffset. Returns nullopt when the target cell falls
// outside the grid or `cls` is not a valid class.
std::optional<CellId> OffsetToCell(CellId from, int32_t cls,
                                   const NeighborhoodSpec& nb,
                                   const GridSpec& grid);

// Dense re-indexing of the cells that actually occur in the data. Model
// input and output layers are sized by this index.
class OccupiedCellIndex {
 public:
  OccupiedCellIndex() = default;
  // `cells` may contain duplicates; the index is sorted by cell id.
  explicit OccupiedCellIndex(std::vector<CellId> cells);

  int32_t size() const { return static_cast<int32_t>(cells_.size()); }
  CellId cell(int32_t dense) const { return cells_[dense]; }
  const std::vector<CellId>& cells() const { return cells_; }
  std::optional<int32_t> Find(CellId cell) const;
  bool Contains(CellId cell) const { return Find(cell).has_value(); }

 private:
  std::vector<CellId> cells_;
  std::unordered_map<int32_t, int32_t> dense_of_;
};

}  // namespace ptraj

#endif  // PTRAJ_GEO_GRID_H_
