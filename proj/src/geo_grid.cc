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

#include "ptraj/geo_grid.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace ptraj {
namespace {

constexpr double kMetersPerDegree =
    kEarthRadiusMeters * std::numbers::pi / 180.0;

// Slack so that an extent of exactly k cells does not round up to k+1.
constexpr double kCellCountSlack = 1e-9;

int32_t CellCount(double extent_m, double cell_size_m) {
  return std::max<int32_t>(
      1, static_cast<int32_t>(
             std::ceil(extent_m / cell_size_m - kCellCountSlack)));
}

}  // namespace

absl::StatusOr<GridSpec> GridSpec::Create(double lat_min, double lat_max,
                                          double lon_min, double lon_max,
                                          double cell_size_m) {
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "degenerate bounding box lat [%g, %g] lon [%g, %g]", lat_min, lat_max,
        lon_min, lon_max));
  }
  if (lat_min < -90 || lat_max > 90 || lon_min < -180 || lon_max > 180) {
    return absl::InvalidArgumentError("bounding box outside WGS-84 range");
  }
  if (!(cell_size_m > 0) || !std::isfinite(cell_size_m)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("cell size must be positive, got %g", cell_size_m));
  }
  GridSpec g;
  g.lat_min_ = lat_min;
  g.lat_max_ = lat_max;
  g.lon_min_ = lon_min;
  g.lon_max_ = lon_max;
  g.cell_size_m_ = cell_size_m;
  const double mid_lat = 0.5 * (lat_min + lat_max) * std::numbers::pi / 180.0;
  g.meters_per_deg_lat_ = kMetersPerDegree;
  g.meters_per_deg_lon_ = kMetersPerDegree * std::cos(mid_lat);
  g.n_rows_ = CellCount((lat_max - lat_min) * g.meters_per_deg_lat_,
                        cell_size_m);
  g.n_cols_ = CellCount((lon_max - lon_min) * g.meters_per_deg_lon_,
                        cell_size_m);
  return g;
}

absl::StatusOr<GridSpec> GridSpec::ForDimensions(int32_t rows, int32_t cols,
                                                 double cell_size_m) {
  if (rows <= 0 || cols <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("grid dimensions must be positive, got %dx%d", rows,
                        cols));
  }
  if (!(cell_size_m > 0)) {
    return absl::InvalidArgumentError("cell size must be positive");
  }
  const double dlat = rows * cell_size_m / kMetersPerDegree;
  // Near the equator cos(mid_lat) is ~1; iterate once to absorb it.
  const double dlon0 = cols * cell_size_m / kMetersPerDegree;
  const double mid = 0.5 * dlat * std::numbers::pi / 180.0;
  const double dlon = dlon0 / std::cos(mid);
  auto g = Create(0.0, dlat, 0.0, dlon, cell_size_m);
  if (!g.ok()) return g.status();
  if (g->n_rows() != rows || g->n_cols() != cols) {
    return absl::InternalError(absl::StrFormat(
        "synthetic grid came out %dx%d instead of %dx%d", g->n_rows(),
        g->n_cols(), rows, cols));
  }
  return g;
}

bool GridSpec::Contains(double lat, double lon) const {
  return lat >= lat_min_ && lat <= lat_max_ && lon >= lon_min_ &&
         lon <= lon_max_;
}

double GridSpec::DistanceMeters(LatLon a, LatLon b) const {
  const double dx = (a.lon - b.lon) * meters_per_deg_lon_;
  const double dy = (a.lat - b.lat) * meters_per_deg_lat_;
  return std::hypot(dx, dy);
}

LatLon GridSpec::CellCenter(CellId cell) const {
  const CellCoord c = ToCoord(cell);
  return {lat_max_ - (c.row + 0.5) * cell_size_m_ / meters_per_deg_lat_,
          lon_min_ + (c.col + 0.5) * cell_size_m_ / meters_per_deg_lon_};
}

bool GridSpec::SameLayout(const GridSpec& other) const {
  return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
         std::abs(cell_size_m_ - other.cell_size_m_) < 1e-9;
}

absl::StatusOr<CellId> Snap(double lat, double lon, const GridSpec& grid) {
  if (!grid.Contains(lat, lon)) {
    return absl::OutOfRangeError(
        absl::StrFormat("point (%.6f, %.6f) outside bounding box", lat, lon));
  }
  // The closed south/east edges fold into the last row/column.
  const int32_t row = std::min<int32_t>(
      grid.n_rows() - 1,
      static_cast<int32_t>(std::floor(grid.SouthMeters(lat) /
                                      grid.cell_size_m())));
  const int32_t col = std::min<int32_t>(
      grid.n_cols() - 1,
      static_cast<int32_t>(std::floor(grid.EastMeters(lon) /
                                      grid.cell_size_m())));
  return grid.ToCell({row, col});
}

double CellDistanceMeters(CellId a, CellId b, const GridSpec& grid) {
  const CellCoord ca = grid.ToCoord(a);
  const CellCoord cb = grid.ToCoord(b);
  return grid.cell_size_m() * std::hypot(static_cast<double>(ca.row - cb.row),
                                         static_cast<double>(ca.col - cb.col));
}

absl::StatusOr<int32_t> RelativeOffset(CellId from, CellId to,
                                       const NeighborhoodSpec& nb,
                                       const GridSpec& grid) {
  const CellCoord a = grid.ToCoord(from);
  const CellCoord b = grid.ToCoord(to);
  if (ChebyshevDistance(a, b) > nb.radius) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "NotNeighbor: cells %d and %d are %d cells apart (radius %d)",
        from.index, to.index, ChebyshevDistance(a, b), nb.radius));
  }
  return nb.ClassFor(b.row - a.row, b.col - a.col);
}

std::optional<CellId> OffsetToCell(CellId from, int32_t cls,
                                   const NeighborhoodSpec& nb,
                                   const GridSpec& grid) {
  if (cls < 0 || cls >= nb.class_count()) return std::nullopt;
  const CellCoord a = grid.ToCoord(from);
  const CellCoord off = nb.OffsetFor(cls);
  const CellCoord b{a.row + off.row, a.col + off.col};
  if (!grid.IsValid(b)) return std::nullopt;
  return grid.ToCell(b);
}

OccupiedCellIndex::OccupiedCellIndex(std::vector<CellId> cells)
    : cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  dense_of_.reserve(cells_.size());
  for (int32_t i = 0; i < size(); ++i) dense_of_[cells_[i].index] = i;
}

std::optional<int32_t> OccupiedCellIndex::Find(CellId cell) const {
  auto it = dense_of_.find(cell.index);
  if (it == dense_of_.end()) return std::nullopt;
  return it->second;
}

}  // namespace ptraj
