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

// Raw taxi GPS logs -> cleaned, grid-snapped, hour-stamped trajectories.
//
// Stage order:
//   split_trips -> filter_speed_bbox -> snap -> aggregate (60 s)
//   -> interpolate gaps -> contract self-loops -> drop length-1
//   -> drop weekend/holiday -> assign hour

#ifndef PTRAJ_PREPROCESS_H_
#define PTRAJ_PREPROCESS_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "ptraj/dataset.h"
#include "ptraj/geo_grid.h"

namespace ptraj {

struct RawPoint {
  std::string taxi_id;
  double lat = 0;
  double lon = 0;
  bool occupied = false;
  int64_t timestamp = 0;  // unix seconds
};

using RawTrip = std::vector<RawPoint>;

struct TimedCell {
  CellId cell;
  int64_t timestamp = 0;
  bool operator==(const TimedCell&) const = default;
};

struct PreprocessOptions {
  double max_speed_kmh = 150.0;
  int64_t aggregation_window_s = 60;
  int64_t gap_split_s = 300;
  // Local wall-clock offset applied before computing hour of day and
  // calendar date. The cabspotting logs are UTC; San Francisco in the
  // collection period is UTC-7.
  int64_t utc_offset_s = -7 * 3600;
  std::set<std::chrono::year_month_day> blacklist_dates;
};

// Reasons a trip (or part of one) leaves the pipeline.
enum class DropReason {
  kOutOfBox,
  kTooFast,
  kSingleVisit,
  kCalendar,
  kFarTransition,
  kMalformedRow,
};
absl::string_view DropReasonName(DropReason r);

struct PreprocessStats {
  std::map<DropReason, int64_t> drops;
  int64_t raw_points = 0;
  int64_t raw_trips = 0;
  int64_t gap_splits = 0;
  void Count(DropReason r, int64_t n = 1) { drops[r] += n; }
};

// Parses one cabspotting file ("lat lon occupied unix_time" per line) and
// returns its points sorted by timestamp. Malformed rows are skipped and
// counted.
absl::StatusOr<std::vector<RawPoint>> ParseCabspottingFile(
    absl::string_view contents, absl::string_view taxi_id,
    PreprocessStats* stats);

// One trip per maximal run of occupied=true points. Expects points sorted
// by (taxi_id, timestamp); a change of taxi ends the current run.
std::vector<RawTrip> SplitTrips(const std::vector<RawPoint>& points);

// True if every point lies in the box and no consecutive pair implies a
// speed above `max_speed_kmh`. Sets `reason` on rejection.
bool PassesSpeedAndBox(const RawTrip& trip, const GridSpec& grid,
                       double max_speed_kmh, DropReason* reason);

// Partitions the timeline into windows anchored at the first timestamp and
// keeps the majority cell per window (ties -> earliest seen), stamped with
// the window start.
std::vector<TimedCell> AggregateWindows(const std::vector<TimedCell>& visits,
                                        int64_t window_s = 60);

// Fills gaps window_s < g < split_s with one linearly interpolated visit per
// missing window step (rounded in row/col index space). Gaps >= split_s
// split the sequence; the pieces are returned in order.
std::vector<std::vector<TimedCell>> InterpolateGaps(
    const std::vector<TimedCell>& visits, const GridSpec& grid,
    int64_t window_s = 60, int64_t split_s = 300);

// Collapses runs of identical consecutive cells, keeping the first
// timestamp of each run.
std::vector<TimedCell> ContractSelfLoops(const std::vector<TimedCell>& visits);

// Local calendar date of a unix timestamp.
std::chrono::year_month_day LocalDate(int64_t timestamp, int64_t utc_offset_s);
int32_t LocalHour(int64_t timestamp, int64_t utc_offset_s);

// True if the trip starting at `first_timestamp` must be dropped: Saturday,
// Sunday, or a blacklisted date.
bool IsExcludedDay(int64_t first_timestamp, const PreprocessOptions& options);

// Most frequent local hour among the visits (ties -> the hour seen first).
TimeSlot AssignHour(const std::vector<TimedCell>& visits,
                    int64_t utc_offset_s);

// Parses a holiday list: one YYYY-MM-DD per line, '#' comments.
absl::StatusOr<std::set<std::chrono::year_month_day>> ParseDateBlacklist(
    absl::string_view text);

// Runs every stage on one taxi's raw points, appending finished
// trajectories to `out` in trip order.
void PreprocessTaxi(const std::vector<RawPoint>& points, const GridSpec& grid,
                    const PreprocessOptions& options,
                    std::vector<Trajectory>* out, PreprocessStats* stats);

// ((current, destination, hour) -> next) record for the transition model.
struct TransitionSample {
  CellId current;
  CellId destination;
  TimeSlot hour;
  int32_t label = 0;  // relative-offset class of the successor
  bool operator==(const TransitionSample&) const = default;
};

// One sample per consecutive pair. Pairs farther apart than the radius are
// skipped and counted as kFarTransition.
std::vector<TransitionSample> ExtractTransitionSamples(
    const Trajectory& traj, const NeighborhoodSpec& nb, const GridSpec& grid,
    PreprocessStats* stats = nullptr);

}  // namespace ptraj

#endif  // PTRAJ_PREPROCESS_H_
