// Copyright 2026 The retro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON and CSV serialization of run reports, timing records, sweeps and
// bound checks. Schemas are documented in docs/schemas.md.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "retro/regret.hpp"
#include "retro/scenario.hpp"

namespace retro {

inline constexpr int kSchemaVersion = 1;

// Column order of every CSV table.
inline constexpr const char* kCsvHeader =
    "T,n,method,event_time_us,total_time_us,cost_diff,total_regret,bound,"
    "violations";

struct CsvRow {
  int T = 0;
  int n = 0;
  std::string method;
  std::optional<double> event_time_us;
  std::optional<double> total_time_us;
  std::optional<double> cost_diff;
  std::optional<double> total_regret;
  std::optional<double> bound;
  std::optional<int> violations;

  bool operator==(const CsvRow&) const = default;
};

// %.17g; empty cells for missing values.
std::string format_number(double x);
std::string to_csv(const std::vector<CsvRow>& rows);
// Throws Error on a header mismatch or malformed row.
std::vector<CsvRow> parse_csv(const std::string& text);

std::vector<CsvRow> csv_rows(const RunReport& report);
std::vector<CsvRow> csv_rows(const std::vector<ComplexityRecord>& records);
std::vector<CsvRow> csv_rows(const std::vector<SweepRow>& rows);

nlohmann::json to_json(const ShiftEvent& event);
ShiftEvent shift_event_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RegretReport& r);
RegretReport regret_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MethodReport& r);
MethodReport method_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunReport& r);
// Restores everything serialized (solver internals are not).
RunReport run_report_from_json(const nlohmann::json& j);

// Records plus the log-log slopes of event time against n per method.
nlohmann::json to_json(const std::vector<ComplexityRecord>& records);
nlohmann::json to_json(const std::vector<SweepRow>& rows);
nlohmann::json to_json(const BoundsReport& r);

// One JSON-lines record for the event log.
std::string event_log_line(const std::string& method, std::uint64_t seed,
                           const ShiftEvent& event);

// Throw Error with the path on I/O failure.
void write_text(const std::string& path, const std::string& text);
void append_line(const std::string& path, const std::string& line);

}  // namespace retro
