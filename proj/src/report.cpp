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

#include "retro/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace retro {

using nlohmann::json;

namespace {

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json series(const std::vector<Vector>& s) {
  json a = json::array();
  for (const Vector& v : s) a.push_back(vec(v));
  return a;
}

double num(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

Vector vec_from(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = num(j[i]);
  }
  return v;
}

std::vector<Vector> series_from(const json& j) {
  std::vector<Vector> out;
  for (const json& v : j) out.push_back(vec_from(v));
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

std::string cell(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string to_csv(const std::vector<CsvRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const CsvRow& r : rows) {
    out += std::to_string(r.T) + "," + std::to_string(r.n) + "," + r.method +
           "," + cell(r.event_time_us) + "," + cell(r.total_time_us) + "," +
           cell(r.cost_diff) + "," + cell(r.total_regret) + "," +
           cell(r.bound) + "," +
           (r.violations ? std::to_string(*r.violations) : std::string()) +
           "\n";
  }
  return out;
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != kCsvHeader) {
    throw Error("csv: header does not match the documented schema");
  }
  std::vector<CsvRow> rows;
  int lineno = 1;
  auto opt = [&](const std::string& c) -> std::optional<double> {
    if (c.empty()) return std::nullopt;
    try {
      return std::stod(c);
    } catch (const std::exception&) {
      throw Error("csv line " + std::to_string(lineno) + ": bad number '" + c +
                  "'");
    }
  };
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line, ',');
    if (c.size() != 9) {
      throw Error("csv line " + std::to_string(lineno) + ": expected 9 cells");
    }
    CsvRow r;
    try {
      r.T = std::stoi(c[0]);
      r.n = std::stoi(c[1]);
    } catch (const std::exception&) {
      throw Error("csv line " + std::to_string(lineno) + ": bad integer");
    }
    r.method = c[2];
    r.event_time_us = opt(c[3]);
    r.total_time_us = opt(c[4]);
    r.cost_diff = opt(c[5]);
    r.total_regret = opt(c[6]);
    r.bound = opt(c[7]);
    if (auto v = opt(c[8])) r.violations = static_cast<int>(*v);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> csv_rows(const RunReport& report) {
  std::vector<CsvRow> rows;
  const MethodReport* oracle = report.find("oracle");
  const ModelPtr model =
      make_model(report.config.model.id, report.config.model.options);
  for (const MethodReport& m : report.methods) {
    CsvRow r;
    r.T = report.config.horizon;
    r.n = model->state_dim();
    r.method = m.method;
    std::vector<double> times;
    for (const ShiftEvent& e : m.events) times.push_back(e.wall_time_us);
    if (!times.empty()) r.event_time_us = median(times);
    r.total_time_us = m.total_time_us;
    if (oracle && oracle->ok && m.ok) {
      r.cost_diff = m.total_cost - oracle->total_cost;
    }
    if (m.regret) {
      r.total_regret = m.regret->total_regret;
      r.bound = m.regret->bound;
      r.violations = static_cast<int>(m.regret->violations.size());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> csv_rows(const std::vector<ComplexityRecord>& records) {
  std::vector<CsvRow> rows;
  for (const ComplexityRecord& c : records) {
    CsvRow r;
    r.T = c.T;
    r.n = c.n;
    r.method = c.method;
    if (!c.event_time_us.empty()) r.event_time_us = c.event_median_us;
    r.total_time_us = c.total_time_us;
    if (c.method != "oracle_ddp") r.cost_diff = c.cost_diff;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> csv_rows(const std::vector<SweepRow>& sweep) {
  std::vector<CsvRow> rows;
  for (const SweepRow& s : sweep) {
    CsvRow r;
    r.T = s.T;
    r.n = 4;
    r.method = "retro";
    if (s.valid) {
      r.cost_diff = s.cost_diff;
      r.total_regret = s.total_regret;
    }
    r.bound = s.bound;
    r.violations = s.violations;
    rows.push_back(std::move(r));
  }
  return rows;
}

json to_json(const ShiftEvent& e) {
  return {{"t", e.t},
          {"kl", e.kl},
          {"kl_std_error", e.kl_std_error},
          {"condition", e.condition},
          {"du_norm", e.du_norm},
          {"wall_time_us", e.wall_time_us},
          {"ill_conditioned", e.ill_conditioned},
          {"failed", e.failed},
          {"error", e.error},
          {"linear_solves", e.linear_solves},
          {"ddp_iterations", e.ddp_iterations}};
}

ShiftEvent shift_event_from_json(const json& j) {
  ShiftEvent e;
  e.t = j.at("t").get<int>();
  e.kl = num(j.at("kl"));
  e.kl_std_error = num(j.at("kl_std_error"));
  e.condition = num(j.at("condition"));
  e.du_norm = num(j.at("du_norm"));
  e.wall_time_us = num(j.at("wall_time_us"));
  e.ill_conditioned = j.at("ill_conditioned").get<bool>();
  e.failed = j.at("failed").get<bool>();
  e.error = j.at("error").get<std::string>();
  e.linear_solves = j.at("linear_solves").get<int>();
  e.ddp_iterations = j.at("ddp_iterations").get<int>();
  return e;
}

json to_json(const RegretReport& r) {
  return {{"R", r.R},
          {"bound", r.bound},
          {"total_regret", r.total_regret},
          {"max_regret", r.max_regret},
          {"violations", r.violations},
          {"delta_v_m", r.delta_v_m},
          {"m", r.m}};
}

RegretReport regret_report_from_json(const json& j) {
  RegretReport r;
  for (const json& x : j.at("R")) r.R.push_back(num(x));
  r.bound = num(j.at("bound"));
  r.total_regret = num(j.at("total_regret"));
  r.max_regret = num(j.at("max_regret"));
  r.violations = j.at("violations").get<std::vector<int>>();
  r.delta_v_m = num(j.at("delta_v_m"));
  r.m = j.at("m").get<int>();
  return r;
}

json to_json(const MethodReport& r) {
  json events = json::array();
  for (const ShiftEvent& e : r.events) events.push_back(to_json(e));
  return {{"method", r.method},
          {"ok", r.ok},
          {"error", r.error},
          {"final_error", r.final_error},
          {"total_cost", r.total_cost},
          {"states", series(r.states)},
          {"controls", series(r.controls)},
          {"events", events},
          {"timings",
           {{"plan_us", r.plan_time_us},
            {"belief_us", r.belief_time_us},
            {"adjust_us", r.adjust_time_us},
            {"total_us", r.total_time_us}}},
          {"ddp_iterations", r.ddp_iterations},
          {"regret", r.regret ? to_json(*r.regret) : json(nullptr)}};
}

MethodReport method_report_from_json(const json& j) {
  MethodReport r;
  r.method = j.at("method").get<std::string>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.final_error = num(j.at("final_error"));
  r.total_cost = num(j.at("total_cost"));
  r.states = series_from(j.at("states"));
  r.controls = series_from(j.at("controls"));
  for (const json& e : j.at("events")) r.events.push_back(shift_event_from_json(e));
  const json& t = j.at("timings");
  r.plan_time_us = num(t.at("plan_us"));
  r.belief_time_us = num(t.at("belief_us"));
  r.adjust_time_us = num(t.at("adjust_us"));
  r.total_time_us = num(t.at("total_us"));
  r.ddp_iterations = j.at("ddp_iterations").get<int>();
  if (!j.at("regret").is_null()) {
    r.regret = regret_report_from_json(j.at("regret"));
  }
  return r;
}

json to_json(const RunReport& r) {
  json obs = json::array();
  for (const Observation& o : r.target.observations) {
    obs.push_back({{"t", o.t}, {"y", vec(o.y)}, {"noise", o.noise}});
  }
  json methods = json::array();
  for (const MethodReport& m : r.methods) methods.push_back(to_json(m));
  return {{"schema_version", kSchemaVersion},
          {"version", r.version},
          {"seed", r.seed},
          {"replayed", r.replayed},
          {"config", to_json(r.config)},
          {"target",
           {{"launch_state", vec(r.target.launch_state)},
            {"truth", series(r.target.truth)},
            {"observations", obs}}},
          {"methods", methods}};
}

RunReport run_report_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw Error("report: unsupported schema version");
  }
  RunReport r;
  r.version = j.at("version").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.replayed = j.at("replayed").get<bool>();
  r.config = parse_config(j.at("config").dump());
  const json& t = j.at("target");
  r.target.launch_state = vec_from(t.at("launch_state"));
  r.target.truth = series_from(t.at("truth"));
  for (const json& o : t.at("observations")) {
    Observation ob;
    ob.t = o.at("t").get<int>();
    ob.y = vec_from(o.at("y"));
    ob.noise = num(o.at("noise"));
    r.target.observations.push_back(std::move(ob));
  }
  for (const json& m : j.at("methods")) {
    r.methods.push_back(method_report_from_json(m));
  }
  return r;
}

json to_json(const std::vector<ComplexityRecord>& records) {
  json recs = json::array();
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      by_method;
  for (const ComplexityRecord& c : records) {
    recs.push_back({{"method", c.method},
                    {"T", c.T},
                    {"n", c.n},
                    {"m", c.m},
                    {"event_time_us", c.event_time_us},
                    {"event_median_us", c.event_median_us},
                    {"total_time_us", c.total_time_us},
                    {"cost_diff", c.cost_diff},
                    {"iterations", c.iterations},
                    {"events", c.events}});
    if (c.event_median_us > 0) {
      by_method[c.method].first.push_back(c.n);
      by_method[c.method].second.push_back(c.event_median_us);
    }
  }
  json slopes = json::object();
  for (const auto& [method, xy] : by_method) {
    if (xy.first.size() >= 2) {
      slopes[method] = loglog_slope(xy.first, xy.second);
    }
  }
  return {{"schema_version", kSchemaVersion},
          {"records", recs},
          {"event_time_slope", slopes}};
}

json to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const SweepRow& s : rows) {
    out.push_back({{"T", s.T},
                   {"cost_diff", s.cost_diff},
                   {"total_regret", s.total_regret},
                   {"bound", s.bound},
                   {"violations", s.violations},
                   {"valid", s.valid}});
  }
  return {{"schema_version", kSchemaVersion}, {"rows", out}};
}

json to_json(const BoundsReport& r) {
  json theorem = json::array();
  for (const TheoremRow& t : r.theorem) {
    theorem.push_back({{"T", t.T},
                       {"seeds", t.seeds},
                       {"violations", t.violations},
                       {"max_ratio", t.max_ratio},
                       {"max_step_kl", t.max_step_kl}});
  }
  json tv = json::array();
  for (const auto& [T, s] : r.theorem_violations) tv.push_back({T, s});
  return {{"schema_version", kSchemaVersion},
          {"lemma",
           {{"instances", r.lemma_instances},
            {"violations", r.lemma_violations},
            {"min_margin", r.lemma_min_margin}}},
          {"theorem", theorem},
          {"theorem_violations", tv}};
}

std::string event_log_line(const std::string& method, std::uint64_t seed,
                           const ShiftEvent& event) {
  json j = to_json(event);
  j["method"] = method;
  j["seed"] = seed;
  return j.dump();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open for writing: " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw Error(path + ": write failed");
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(path + ": cannot open for appending: " + std::strerror(errno));
  out << line << '\n';
  out.flush();
  if (!out) throw Error(path + ": write failed");
}

}  // namespace retro
