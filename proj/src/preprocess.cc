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

#include "ptraj/preprocess.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace ptraj {
namespace {

constexpr int64_t kSecondsPerDay = 86400;

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

absl::string_view DropReasonName(DropReason r) {
  switch (r) {
    case DropReason::kOutOfBox:
      return "out_of_box";
    case DropReason::kTooFast:
      return "too_fast";
    case DropReason::kSingleVisit:
      return "single_visit";
    case DropReason::kCalendar:
      return "weekend_or_holiday";
    case DropReason::kFarTransition:
      return "far_transition";
    case DropReason::kMalformedRow:
      return "malformed_row";
  }
  return "unknown";
}

absl::StatusOr<std::vector<RawPoint>> ParseCabspottingFile(
    absl::string_view contents, absl::string_view taxi_id,
    PreprocessStats* stats) {
  std::vector<RawPoint> points;
  for (absl::string_view line : absl::StrSplit(contents, '\n')) {
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<absl::string_view> cols =
        absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty());
    RawPoint p;
    p.taxi_id = std::string(taxi_id);
    int occupied = 0;
    if (cols.size() != 4 || !absl::SimpleAtod(cols[0], &p.lat) ||
        !absl::SimpleAtod(cols[1], &p.lon) ||
        !absl::SimpleAtoi(cols[2], &occupied) ||
        !absl::SimpleAtoi(cols[3], &p.timestamp) ||
        (occupied != 0 && occupied != 1) || !std::isfinite(p.lat) ||
        !std::isfinite(p.lon)) {
      if (stats) stats->Count(DropReason::kMalformedRow);
      continue;
    }
    p.occupied = occupied == 1;
    points.push_back(std::move(p));
  }
  // Files are newest-first in the original release; accept either order.
  std::stable_sort(points.begin(), points.end(),
                   [](const RawPoint& a, const RawPoint& b) {
                     return a.timestamp < b.timestamp;
                   });
  auto dup = std::unique(points.begin(), points.end(),
                         [](const RawPoint& a, const RawPoint& b) {
                           return a.timestamp == b.timestamp;
                         });
  if (stats) {
    stats->Count(DropReason::kMalformedRow, points.end() - dup);
    stats->raw_points += dup - points.begin();
  }
  points.erase(dup, points.end());
  return points;
}

std::vector<RawTrip> SplitTrips(const std::vector<RawPoint>& points) {
  std::vector<RawTrip> trips;
  RawTrip current;
  const std::string* current_taxi = nullptr;
  for (const RawPoint& p : points) {
    if (current_taxi != nullptr && *current_taxi != p.taxi_id &&
        !current.empty()) {
      trips.push_back(std::move(current));
      current.clear();
    }
    current_taxi = &p.taxi_id;
    if (p.occupied) {
      current.push_back(p);
    } else if (!current.empty()) {
      trips.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) trips.push_back(std::move(current));
  return trips;
}

bool PassesSpeedAndBox(const RawTrip& trip, const GridSpec& grid,
                       double max_speed_kmh, DropReason* reason) {
  for (const RawPoint& p : trip) {
    if (!grid.Contains(p.lat, p.lon)) {
      if (reason) *reason = DropReason::kOutOfBox;
      return false;
    }
  }
  const double max_mps = max_speed_kmh / 3.6;
  for (size_t i = 1; i < trip.size(); ++i) {
    const double d = grid.DistanceMeters({trip[i - 1].lat, trip[i - 1].lon},
                                         {trip[i].lat, trip[i].lon});
    const double dt =
        static_cast<double>(trip[i].timestamp - trip[i - 1].timestamp);
    const bool too_fast = dt <= 0 ? d > 0 : d / dt > max_mps;
    if (too_fast) {
      if (reason) *reason = DropReason::kTooFast;
      return false;
    }
  }
  return true;
}

std::vector<TimedCell> AggregateWindows(const std::vector<TimedCell>& visits,
                                        int64_t window_s) {
  std::vector<TimedCell> out;
  if (visits.empty()) return out;
  const int64_t t0 = visits.front().timestamp;
  size_t i = 0;
  while (i < visits.size()) {
    const int64_t w = FloorDiv(visits[i].timestamp - t0, window_s);
    // Counts in first-seen order so ties resolve to the earliest cell.
    std::vector<std::pair<CellId, int>> counts;
    size_t j = i;
    for (; j < visits.size() &&
           FloorDiv(visits[j].timestamp - t0, window_s) == w;
         ++j) {
      auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) {
        return c.first == visits[j].cell;
      });
      if (it == counts.end()) {
        counts.emplace_back(visits[j].cell, 1);
      } else {
        ++it->second;
      }
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out.push_back({best->first, t0 + w * window_s});
    i = j;
  }
  return out;
}

std::vector<std::vector<TimedCell>> InterpolateGaps(
    const std::vector<TimedCell>& visits, const GridSpec& grid,
    int64_t window_s, int64_t split_s) {
  std::vector<std::vector<TimedCell>> pieces;
  if (visits.empty()) return pieces;
  std::vector<TimedCell> current{visits.front()};
  for (size_t i = 1; i < visits.size(); ++i) {
    const TimedCell& a = visits[i - 1];
    const TimedCell& b = visits[i];
    const int64_t gap = b.timestamp - a.timestamp;
    if (gap >= split_s) {
      pieces.push_back(std::move(current));
      current = {b};
      continue;
    }
    if (gap > window_s) {
      const int64_t steps = gap / window_s;
      const CellCoord ca = grid.ToCoord(a.cell);
      const CellCoord cb = grid.ToCoord(b.cell);
      for (int64_t k = 1; k < steps; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(steps);
        const CellCoord c{
            static_cast<int32_t>(std::lround(ca.row + f * (cb.row - ca.row))),
            static_cast<int32_t>(std::lround(ca.col + f * (cb.col - ca.col)))};
        current.push_back({grid.ToCell(c), a.timestamp + k * window_s});
      }
    }
    current.push_back(b);
  }
  pieces.push_back(std::move(current));
  return pieces;
}

std::vector<TimedCell> ContractSelfLoops(const std::vector<TimedCell>& visits) {
  std::vector<TimedCell> out;
  for (const TimedCell& v : visits) {
    if (out.empty() || out.back().cell != v.cell) out.push_back(v);
  }
  return out;
}

std::chrono::year_month_day LocalDate(int64_t timestamp,
                                      int64_t utc_offset_s) {
  const int64_t days = FloorDiv(timestamp + utc_offset_s, kSecondsPerDay);
  return std::chrono::year_month_day{
      std::chrono::sys_days{std::chrono::days{days}}};
}

int32_t LocalHour(int64_t timestamp, int64_t utc_offset_s) {
  const int64_t local = timestamp + utc_offset_s;
  const int64_t sec_of_day = local - FloorDiv(local, kSecondsPerDay) *
                                         kSecondsPerDay;
  return static_cast<int32_t>(sec_of_day / 3600);
}

bool IsExcludedDay(int64_t first_timestamp, const PreprocessOptions& options) {
  const std::chrono::year_month_day date =
      LocalDate(first_timestamp, options.utc_offset_s);
  const std::chrono::weekday wd{std::chrono::sys_days{date}};
  if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) return true;
  return options.blacklist_dates.contains(date);
}

TimeSlot AssignHour(const std::vector<TimedCell>& visits,
                    int64_t utc_offset_s) {
  std::vector<std::pair<int32_t, int>> counts;  // first-seen order
  for (const TimedCell& v : visits) {
    const int32_t h = LocalHour(v.timestamp, utc_offset_s);
    auto it = std::find_if(counts.begin(), counts.end(),
                           [h](const auto& c) { return c.first == h; });
    if (it == counts.end()) {
      counts.emplace_back(h, 1);
    } else {
      ++it->second;
    }
  }
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return TimeSlot{best->first};
}

absl::StatusOr<std::set<std::chrono::year_month_day>> ParseDateBlacklist(
    absl::string_view text) {
  std::set<std::chrono::year_month_day> dates;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    std::vector<absl::string_view> parts = absl::StrSplit(line, '-');
    int y = 0;
    unsigned m = 0, d = 0;
    if (parts.size() != 3 || parts[0].size() != 4 || parts[1].size() != 2 ||
        parts[2].size() != 2 || !absl::SimpleAtoi(parts[0], &y) ||
        !absl::SimpleAtoi(parts[1], &m) || !absl::SimpleAtoi(parts[2], &d)) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "holiday file line %d: expected YYYY-MM-DD, got '%s'", line_no,
          line));
    }
    const std::chrono::year_month_day date{std::chrono::year{y},
                                           std::chrono::month{m},
                                           std::chrono::day{d}};
    if (!date.ok()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "holiday file line %d: invalid date '%s'", line_no, line));
    }
    dates.insert(date);
  }
  return dates;
}

void PreprocessTaxi(const std::vector<RawPoint>& points, const GridSpec& grid,
                    const PreprocessOptions& options,
                    std::vector<Trajectory>* out, PreprocessStats* stats) {
  for (const RawTrip& trip : SplitTrips(points)) {
    if (stats) ++stats->raw_trips;
    DropReason reason;
    if (!PassesSpeedAndBox(trip, grid, options.max_speed_kmh, &reason)) {
      if (stats) stats->Count(reason);
      continue;
    }
    std::vector<TimedCell> visits;
    visits.reserve(trip.size());
    for (const RawPoint& p : trip) {
      // In-box was checked above, so Snap cannot fail here.
      visits.push_back({*Snap(p.lat, p.lon, grid), p.timestamp});
    }
    const std::vector<TimedCell> aggregated =
        AggregateWindows(visits, options.aggregation_window_s);
    std::vector<std::vector<TimedCell>> pieces = InterpolateGaps(
        aggregated, grid, options.aggregation_window_s, options.gap_split_s);
    if (stats) stats->gap_splits += static_cast<int64_t>(pieces.size()) - 1;
    for (const std::vector<TimedCell>& piece : pieces) {
      const std::vector<TimedCell> contracted = ContractSelfLoops(piece);
      if (contracted.size() < 2) {
        if (stats) stats->Count(DropReason::kSingleVisit);
        continue;
      }
      if (IsExcludedDay(contracted.front().timestamp, options)) {
        if (stats) stats->Count(DropReason::kCalendar);
        continue;
      }
      Trajectory t;
      t.hour = AssignHour(contracted, options.utc_offset_s);
      t.cells.reserve(contracted.size());
      for (const TimedCell& v : contracted) t.cells.push_back(v.cell);
      out->push_back(std::move(t));
    }
  }
}

std::vector<TransitionSample> ExtractTransitionSamples(
    const Trajectory& traj, const NeighborhoodSpec& nb, const GridSpec& grid,
    PreprocessStats* stats) {
  std::vector<TransitionSample> samples;
  if (traj.cells.size() < 2) return samples;
  samples.reserve(traj.cells.size() - 1);
  const CellId dst = traj.destination();
  for (size_t i = 0; i + 1 < traj.cells.size(); ++i) {
    absl::StatusOr<int32_t> cls =
        RelativeOffset(traj.cells[i], traj.cells[i + 1], nb, grid);
    if (!cls.ok() || *cls == nb.center_class()) {
      if (stats) stats->Count(DropReason::kFarTransition);
      continue;
    }
    samples.push_back({traj.cells[i], dst, traj.hour, *cls});
  }
  return samples;
}

}  // namespace ptraj
