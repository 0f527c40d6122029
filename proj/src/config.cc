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

#include "ptraj/config.h"

#include <cmath>
#include <filesystem>
#include <functional>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "ptraj/dataset.h"
#include "ptraj/rng.h"

namespace ptraj {
namespace {

struct Field {
  std::string key;
  std::function<absl::Status(RunConfig&, absl::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

absl::Status BadValue(absl::string_view key, absl::string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", key, "' has invalid value '", value, "'"));
}

// %.17g round-trips doubles exactly.
std::string FormatDouble(double v) { return absl::StrFormat("%.17g", v); }

template <typename T>
Field Number(std::string key, T RunConfig::*member) {
  return {key,
          [key, member](RunConfig& c, absl::string_view v) {
            T parsed;
            bool ok;
            if constexpr (std::is_floating_point_v<T>) {
              ok = absl::SimpleAtod(v, &parsed) && std::isfinite(parsed);
            } else {
              ok = absl::SimpleAtoi(v, &parsed);
            }
            if (!ok) return BadValue(key, v);
            c.*member = parsed;
            return absl::OkStatus();
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return FormatDouble(c.*member);
            } else {
              return absl::StrCat(c.*member);
            }
          }};
}

template <typename T>
Field DpNumber(std::string key, DpSgdConfig RunConfig::*model,
               T DpSgdConfig::*member) {
  return {key,
          [key, model, member](RunConfig& c, absl::string_view v) {
            T parsed;
            bool ok;
            if constexpr (std::is_floating_point_v<T>) {
              ok = absl::SimpleAtod(v, &parsed) && std::isfinite(parsed);
            } else {
              ok = absl::SimpleAtoi(v, &parsed);
            }
            if (!ok) return BadValue(key, v);
            (c.*model).*member = parsed;
            return absl::OkStatus();
          },
          [model, member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return FormatDouble((c.*model).*member);
            } else {
              return absl::StrCat((c.*model).*member);
            }
          }};
}

Field Text(std::string key, std::string RunConfig::*member) {
  return {key,
          [member](RunConfig& c, absl::string_view v) {
            c.*member = std::string(v);
            return absl::OkStatus();
          },
          [member](const RunConfig& c) { return c.*member; }};
}

std::vector<Field> DpFields(absl::string_view prefix,
                            DpSgdConfig RunConfig::*model) {
  const std::string p(prefix);
  return {DpNumber(p + "clip_norm", model, &DpSgdConfig::clip_norm),
          DpNumber(p + "noise_multiplier", model,
                   &DpSgdConfig::noise_multiplier),
          DpNumber(p + "batch_size", model, &DpSgdConfig::batch_size),
          DpNumber(p + "learning_rate", model, &DpSgdConfig::learning_rate),
          DpNumber(p + "epochs", model, &DpSgdConfig::epochs)};
}

const std::vector<Field>& Fields() {
  static const std::vector<Field>* fields = [] {
    auto* f = new std::vector<Field>{
        Number("lat_min", &RunConfig::lat_min),
        Number("lat_max", &RunConfig::lat_max),
        Number("lon_min", &RunConfig::lon_min),
        Number("lon_max", &RunConfig::lon_max),
        Number("cell_size_m", &RunConfig::cell_size_m),
        Number("grid_rows", &RunConfig::grid_rows),
        Number("grid_cols", &RunConfig::grid_cols),
        Number("max_speed_kmh", &RunConfig::max_speed_kmh),
        Number("aggregation_window_s", &RunConfig::aggregation_window_s),
        Number("gap_split_s", &RunConfig::gap_split_s),
        Number("utc_offset_s", &RunConfig::utc_offset_s),
        Text("holiday_file", &RunConfig::holiday_file),
        Number("radius", &RunConfig::radius),
        Number("ti_hidden", &RunConfig::ti_hidden),
        Number("ti_latent", &RunConfig::ti_latent),
        Number("tpg_embedding", &RunConfig::tpg_embedding),
        Number("tpg_hidden", &RunConfig::tpg_hidden),
    };
    for (Field& d : DpFields("ti_", &RunConfig::ti)) f->push_back(d);
    for (Field& d : DpFields("tpg_", &RunConfig::tpg)) f->push_back(d);
    f->push_back({"delta",
                  [](RunConfig& c, absl::string_view v) {
                    if (v.empty() || v == "auto") {
                      c.delta.reset();
                      return absl::OkStatus();
                    }
                    double d;
                    if (!absl::SimpleAtod(v, &d)) return BadValue("delta", v);
                    c.delta = d;
                    return absl::OkStatus();
                  },
                  [](const RunConfig& c) {
                    return c.delta ? FormatDouble(*c.delta)
                                   : std::string("auto");
                  }});
    f->push_back(Number("seed", &RunConfig::seed));
    f->push_back(Number("threads", &RunConfig::threads));
    f->push_back(Number("generate_count", &RunConfig::generate_count));
    f->push_back(Number("emd_cap", &RunConfig::emd_cap));
    f->push_back({"tpr_k",
                  [](RunConfig& c, absl::string_view v) {
                    std::vector<int> ks;
                    for (absl::string_view part :
                         absl::StrSplit(v, ',', absl::SkipWhitespace())) {
                      int k;
                      if (!absl::SimpleAtoi(part, &k)) {
                        return BadValue("tpr_k", v);
                      }
                      ks.push_back(k);
                    }
                    c.tpr_k = std::move(ks);
                    return absl::OkStatus();
                  },
                  [](const RunConfig& c) { return absl::StrJoin(c.tpr_k, ","); }});
    for (auto [key, member] :
         std::vector<std::pair<std::string, std::string RunConfig::*>>{
             {"out_dir", &RunConfig::out_dir},
             {"raw_dir", &RunConfig::raw_dir},
             {"dataset", &RunConfig::dataset},
             {"ti_model", &RunConfig::ti_model},
             {"tpg_model", &RunConfig::tpg_model},
             {"synthetic", &RunConfig::synthetic},
             {"ledger", &RunConfig::ledger},
             {"report", &RunConfig::report}}) {
      f->push_back(Text(key, member));
    }
    return f;
  }();
  return *fields;
}

#define PTRAJ_CHECK_CONFIG(cond, what)                              \
  do {                                                              \
    if (!(cond)) return absl::InvalidArgumentError("config: " what); \
  } while (0)

}  // namespace

absl::StatusOr<GridSpec> RunConfig::Grid() const {
  if (grid_rows > 0 || grid_cols > 0) {
    return GridSpec::ForDimensions(grid_rows, grid_cols, cell_size_m);
  }
  return GridSpec::Create(lat_min, lat_max, lon_min, lon_max, cell_size_m);
}

PreprocessOptions RunConfig::Preprocess() const {
  PreprocessOptions o;
  o.max_speed_kmh = max_speed_kmh;
  o.aggregation_window_s = aggregation_window_s;
  o.gap_split_s = gap_split_s;
  o.utc_offset_s = utc_offset_s;
  return o;
}

std::string RunConfig::InOut(absl::string_view name) const {
  return (std::filesystem::path(out_dir) / std::string(name)).string();
}

std::string RunConfig::DatasetPath() const {
  return dataset.empty() ? InOut("dataset.ptds") : dataset;
}
std::string RunConfig::TiModelPath() const {
  return ti_model.empty() ? InOut("ti.model") : ti_model;
}
std::string RunConfig::TpgModelPath() const {
  return tpg_model.empty() ? InOut("tpg.model") : tpg_model;
}
std::string RunConfig::SyntheticPath() const {
  return synthetic.empty() ? InOut("synthetic.ptds") : synthetic;
}
std::string RunConfig::LedgerPath() const {
  return ledger.empty() ? InOut("privacy_ledger.txt") : ledger;
}
std::string RunConfig::ReportPath() const {
  return report.empty() ? InOut("metrics_report.txt") : report;
}

absl::Status SetConfigValue(RunConfig& config, absl::string_view key,
                            absl::string_view value) {
  for (const Field& f : Fields()) {
    if (f.key == key) return f.set(config, value);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown config key '", key, "'"));
}

absl::StatusOr<RunConfig> ParseConfig(absl::string_view text) {
  RunConfig config;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != absl::string_view::npos) line = line.substr(0, hash);
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrFormat("config line %d: expected 'key = value'", line_no));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    absl::Status st = SetConfigValue(config, key, value);
    if (!st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("config line %d: %s", line_no, st.message()));
    }
  }
  return config;
}

absl::StatusOr<RunConfig> ReadConfigFile(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFileToString(path);
  if (!text.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot read config: ", text.status().message()));
  }
  return ParseConfig(*text);
}

absl::Status ValidateConfig(const RunConfig& c) {
  if (c.grid_rows > 0 || c.grid_cols > 0) {
    PTRAJ_CHECK_CONFIG(c.grid_rows > 0 && c.grid_cols > 0,
                       "grid_rows and grid_cols must both be positive");
  } else {
    PTRAJ_CHECK_CONFIG(c.lat_min < c.lat_max, "lat_min must be < lat_max");
    PTRAJ_CHECK_CONFIG(c.lon_min < c.lon_max, "lon_min must be < lon_max");
  }
  PTRAJ_CHECK_CONFIG(c.cell_size_m > 0, "cell_size_m must be > 0");
  PTRAJ_CHECK_CONFIG(c.max_speed_kmh > 0, "max_speed_kmh must be > 0");
  PTRAJ_CHECK_CONFIG(c.aggregation_window_s > 0,
                     "aggregation_window_s must be > 0");
  PTRAJ_CHECK_CONFIG(c.gap_split_s > c.aggregation_window_s,
                     "gap_split_s must exceed aggregation_window_s");
  PTRAJ_CHECK_CONFIG(c.radius >= 1, "radius must be >= 1");
  PTRAJ_CHECK_CONFIG(c.ti_hidden > 0 && c.ti_latent > 0 &&
                         c.tpg_embedding > 0 && c.tpg_hidden > 0,
                     "layer sizes must be positive");
  for (const DpSgdConfig* m : {&c.ti, &c.tpg}) {
    PTRAJ_CHECK_CONFIG(m->clip_norm > 0, "clip_norm must be > 0");
    PTRAJ_CHECK_CONFIG(m->noise_multiplier >= 0,
                       "noise_multiplier must be >= 0");
    PTRAJ_CHECK_CONFIG(m->batch_size >= 1, "batch_size must be >= 1");
    PTRAJ_CHECK_CONFIG(m->learning_rate > 0, "learning_rate must be > 0");
    PTRAJ_CHECK_CONFIG(m->epochs >= 0, "epochs must be >= 0");
  }
  if (c.delta) {
    PTRAJ_CHECK_CONFIG(*c.delta > 0 && *c.delta < 1, "delta must be in (0, 1)");
  }
  PTRAJ_CHECK_CONFIG(c.threads >= 1, "threads must be >= 1");
  PTRAJ_CHECK_CONFIG(c.generate_count >= 0, "generate_count must be >= 0");
  PTRAJ_CHECK_CONFIG(c.emd_cap >= 1, "emd_cap must be >= 1");
  for (int k : c.tpr_k) PTRAJ_CHECK_CONFIG(k >= 1, "tpr_k entries must be >= 1");
  return absl::OkStatus();
}

std::string SerializeConfig(const RunConfig& config) {
  std::string out;
  for (const Field& f : Fields()) {
    absl::StrAppend(&out, f.key, " = ", f.get(config), "\n");
  }
  return out;
}

std::string ConfigHash(const RunConfig& config) {
  return absl::StrFormat("%016x", Fnv1a64(SerializeConfig(config)));
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Fields()) keys.push_back(f.key);
  return keys;
}

}  // namespace ptraj
