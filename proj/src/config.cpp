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

#include "retro/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace retro {

using nlohmann::json;

namespace {

std::string format_error(const std::string& file, const std::string& path,
                         int line, const std::string& message) {
  std::string out = file.empty() ? "config" : file;
  if (line > 0) out += ":" + std::to_string(line);
  if (!path.empty()) out += ": " + path;
  return out + ": " + message;
}

int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Maps dotted paths ("model.R", "methods[2]") to the source line of the key
// or element. Also rejects duplicate keys, which the JSON parser would
// silently collapse. Runs only on text that already parsed.
class Locator {
 public:
  explicit Locator(const std::string& text) : text_(text) {
    skip_ws();
    value("");
  }

  int line_of(std::string path) const {
    while (true) {
      auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      if (path.empty()) return 0;
      const auto cut = path.find_last_of(".[");
      path = cut == std::string::npos ? "" : path.substr(0, cut);
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string string() {
    const std::size_t start = pos_++;
    while (text_[pos_] != '"') pos_ += text_[pos_] == '\\' ? 2 : 1;
    ++pos_;
    return json::parse(text_.substr(start, pos_ - start)).get<std::string>();
  }

  void value(const std::string& path) {
    lines_.emplace(path, line_);
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      std::set<std::string> seen;
      if (text_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (true) {
        skip_ws();
        const int key_line = line_;
        const std::string key = string();
        const std::string child = path.empty() ? key : path + "." + key;
        if (!seen.insert(key).second) {
          throw ConfigError(child, key_line, "duplicate key");
        }
        lines_[child] = key_line;
        skip_ws();
        ++pos_;  // ':'
        skip_ws();
        value(child);
        skip_ws();
        if (text_[pos_++] == '}') return;
      }
    }
    if (c == '[') {
      ++pos_;
      skip_ws();
      if (text_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (int i = 0;; ++i) {
        skip_ws();
        value(path + "[" + std::to_string(i) + "]");
        skip_ws();
        if (text_[pos_++] == ']') return;
      }
    }
    if (c == '"') {
      string();
      return;
    }
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
           text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

const char* type_name(const json& j) {
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

class Reader {
 public:
  Reader(const json& j, std::string path, const Locator& loc)
      : j_(j), path_(std::move(path)), loc_(loc) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) fail(child(it.key()), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::optional<Reader> section(const char* key) const {
    if (!has(key)) return std::nullopt;
    return Reader(j_.at(key), child(key), loc_);
  }

  void number(const char* key, double* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) expected(key, "number", v);
    *out = v.get<double>();
  }

  void integer(const char* key, int* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) expected(key, "integer", v);
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() ||
        x > std::numeric_limits<int>::max()) {
      fail(child(key), "integer out of range");
    }
    *out = static_cast<int>(x);
  }

  void unsigned64(const char* key, std::uint64_t* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) expected(key, "non-negative integer", v);
    *out = v.get<std::uint64_t>();
  }

  void boolean(const char* key, bool* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) expected(key, "boolean", v);
    *out = v.get<bool>();
  }

  void text(const char* key, std::string* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) expected(key, "string", v);
    *out = v.get<std::string>();
  }

  void vector(const char* key, Vector* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) expected(key, "array of numbers", v);
    Vector r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        fail(child(key) + "[" + std::to_string(i) + "]", "expected number");
      }
      r(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    *out = r;
  }

  void int_list(const char* key, std::vector<int>* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) expected(key, "array of integers", v);
    std::vector<int> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        fail(child(key) + "[" + std::to_string(i) + "]", "expected integer");
      }
      r.push_back(v[i].get<int>());
    }
    *out = r;
  }

  void string_list(const char* key, std::vector<std::string>* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) expected(key, "array of strings", v);
    std::vector<std::string> r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) {
        fail(child(key) + "[" + std::to_string(i) + "]", "expected string");
      }
      r.push_back(v[i].get<std::string>());
    }
    *out = r;
  }

  // A number c means c * I, a flat array a diagonal, nested arrays a dense
  // matrix (row by row).
  void matrix(const char* key, int dim, std::optional<Matrix>* out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    const std::string p = child(key);
    if (v.is_number()) {
      *out = v.get<double>() * Matrix::Identity(dim, dim);
      return;
    }
    if (!v.is_array()) expected(key, "number or array", v);
    if (static_cast<int>(v.size()) != dim) {
      fail(p, "expected " + std::to_string(dim) + " rows, got " +
                  std::to_string(v.size()));
    }
    Matrix M = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      const json& row = v[i];
      const std::string rp = p + "[" + std::to_string(i) + "]";
      if (row.is_number()) {
        M(i, i) = row.get<double>();
        continue;
      }
      if (!row.is_array() || static_cast<int>(row.size()) != dim) {
        fail(rp, "expected a number or a row of " + std::to_string(dim) +
                     " numbers");
      }
      for (int k = 0; k < dim; ++k) {
        if (!row[k].is_number()) {
          fail(rp + "[" + std::to_string(k) + "]", "expected number");
        }
        M(i, k) = row[k].get<double>();
      }
    }
    *out = M;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& path,
                         const std::string& message) const {
    throw ConfigError(path, loc_.line_of(path), message);
  }

 private:
  [[noreturn]] void expected(const char* key, const char* what,
                             const json& got) const {
    fail(child(key), std::string("expected ") + what + ", got " +
                         type_name(got));
  }

  const json& j_;
  std::string path_;
  const Locator& loc_;
};

GradientMode parse_gradient(const std::string& s, const Reader& r) {
  if (s == "analytic") return GradientMode::kAnalytic;
  if (s == "fd") return GradientMode::kFiniteDifference;
  r.fail(r.child("gradient"), "expected \"analytic\" or \"fd\"");
}

const char* gradient_name(GradientMode m) {
  return m == GradientMode::kAnalytic ? "analytic" : "fd";
}

void read_model(const Reader& r, ModelConfig* mc) {
  r.allow({"id", "dt", "mass", "sigma", "x0", "R", "W", "W_final",
           "augmented_dim", "filter_beta", "arm"});
  r.text("id", &mc->id);
  ModelOptions& o = mc->options;
  r.number("dt", &o.dt);
  r.number("mass", &o.mass);
  r.number("sigma", &o.sigma);
  r.integer("augmented_dim", &o.augmented_dim);
  r.number("filter_beta", &o.filter_beta);
  r.vector("x0", &mc->x0);
  if (auto arm = r.section("arm")) {
    arm->allow({"l1", "l2", "m1", "m2", "damping", "gravity", "base_x",
                "base_y"});
    arm->number("l1", &o.arm.l1);
    arm->number("l2", &o.arm.l2);
    arm->number("m1", &o.arm.m1);
    arm->number("m2", &o.arm.m2);
    arm->number("damping", &o.arm.damping);
    arm->number("gravity", &o.arm.gravity);
    arm->number("base_x", &o.arm.base_x);
    arm->number("base_y", &o.arm.base_y);
  }
  if (r.has("R") || r.has("W") || r.has("W_final")) {
    ModelPtr probe;
    try {
      ModelOptions plain = o;
      plain.R.reset();
      plain.W.reset();
      plain.W_final.reset();
      probe = make_model(mc->id, plain);
    } catch (const Error& e) {
      r.fail(r.child("id"), e.what());
    }
    r.matrix("R", probe->control_dim(), &o.R);
    r.matrix("W", probe->target_dim(), &o.W);
    r.matrix("W_final", probe->target_dim(), &o.W_final);
  }
}

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

ConfigError::ConfigError(const std::string& path, int line,
                         const std::string& message, const std::string& file)
    : Error(format_error(file, path, line, message)),
      path_(path),
      line_(line),
      message_(message),
      file_(file) {}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto colon = msg.find("parse error");
    if (colon != std::string::npos) msg = msg.substr(colon);
    throw ConfigError("", line_at(text, e.byte == 0 ? 0 : e.byte - 1), msg);
  }
  const Locator loc(text);
  const Reader r(root, "", loc);
  r.allow({"model", "horizon", "target", "observations", "forecaster",
           "adjust", "belief", "solver", "seed", "methods", "output",
           "benchmark", "sweep", "bounds"});

  ScenarioConfig cfg;
  if (auto s = r.section("model")) read_model(*s, &cfg.model);
  r.integer("horizon", &cfg.horizon);
  r.unsigned64("seed", &cfg.seed);
  r.string_list("methods", &cfg.methods);

  if (auto s = r.section("target")) {
    s->allow({"launch_position", "launch_velocity", "position_std",
              "velocity_std", "gravity", "process_noise"});
    s->vector("launch_position", &cfg.target.launch_position);
    s->vector("launch_velocity", &cfg.target.launch_velocity);
    s->number("position_std", &cfg.target.position_std);
    s->number("velocity_std", &cfg.target.velocity_std);
    s->vector("gravity", &cfg.target.gravity);
    s->number("process_noise", &cfg.target.process_noise);
  }
  if (auto s = r.section("observations")) {
    s->allow({"start", "every", "stop", "noise", "replay"});
    s->integer("start", &cfg.observations.start);
    s->integer("every", &cfg.observations.every);
    s->integer("stop", &cfg.observations.stop);
    s->number("noise", &cfg.observations.noise);
    s->text("replay", &cfg.observations.replay);
  }
  if (auto s = r.section("forecaster")) {
    s->allow({"kind", "components", "min_observations", "restarts",
              "max_iters", "tol", "seed"});
    s->text("kind", &cfg.forecaster.kind);
    s->integer("components", &cfg.forecaster.components);
    s->integer("min_observations", &cfg.forecaster.min_observations);
    s->integer("restarts", &cfg.forecaster.gmm.restarts);
    s->integer("max_iters", &cfg.forecaster.gmm.max_iters);
    s->number("tol", &cfg.forecaster.gmm.tol);
    s->unsigned64("seed", &cfg.forecaster.gmm.seed);
  }
  if (auto s = r.section("adjust")) {
    s->allow({"threshold", "gradient", "cost_shift_clamp", "condition_limit",
              "ridge"});
    s->number("threshold", &cfg.adjust.threshold);
    if (s->has("gradient")) {
      std::string g;
      s->text("gradient", &g);
      cfg.adjust.gradient = parse_gradient(g, *s);
    }
    s->number("cost_shift_clamp", &cfg.adjust.desirability.cost_shift_clamp);
    s->number("condition_limit", &cfg.adjust.desirability.condition_limit);
    s->number("ridge", &cfg.adjust.desirability.ridge);
  }
  if (auto s = r.section("belief")) {
    s->allow({"process_noise", "kl_samples", "kl_seed"});
    s->number("process_noise", &cfg.belief.process_noise);
    s->integer("kl_samples", &cfg.belief.kl_samples);
    s->unsigned64("kl_seed", &cfg.belief.kl_seed);
  }
  if (auto s = r.section("solver")) {
    s->allow({"max_iters", "tol", "reg_init", "reg_min", "reg_max",
              "reg_increase", "reg_decrease", "line_search_steps",
              "accept_ratio", "full_ddp"});
    DdpOptions& d = cfg.solver;
    s->integer("max_iters", &d.max_iters);
    s->number("tol", &d.tol);
    s->number("reg_init", &d.reg_init);
    s->number("reg_min", &d.reg_min);
    s->number("reg_max", &d.reg_max);
    s->number("reg_increase", &d.reg_increase);
    s->number("reg_decrease", &d.reg_decrease);
    s->integer("line_search_steps", &d.line_search_steps);
    s->number("accept_ratio", &d.accept_ratio);
    s->boolean("full_ddp", &d.full_ddp);
  }
  if (auto s = r.section("output")) {
    s->allow({"dir", "format", "event_log"});
    s->text("dir", &cfg.output.dir);
    s->text("format", &cfg.output.format);
    s->boolean("event_log", &cfg.output.event_log);
  }
  if (auto s = r.section("benchmark")) {
    s->allow({"dims", "horizon", "repetitions", "warmup", "seeds"});
    s->int_list("dims", &cfg.benchmark.dims);
    s->integer("horizon", &cfg.benchmark.horizon);
    s->integer("repetitions", &cfg.benchmark.repetitions);
    s->integer("warmup", &cfg.benchmark.warmup);
    s->integer("seeds", &cfg.benchmark.seeds);
  }
  if (auto s = r.section("sweep")) {
    s->allow({"horizons", "seeds", "duration", "shift_scale",
              "control_weight", "tracking_weight", "final_weight"});
    s->int_list("horizons", &cfg.sweep.horizons);
    s->integer("seeds", &cfg.sweep.seeds);
    s->number("duration", &cfg.sweep.duration);
    s->number("shift_scale", &cfg.sweep.shift_scale);
    s->number("control_weight", &cfg.sweep.control_weight);
    s->number("tracking_weight", &cfg.sweep.tracking_weight);
    s->number("final_weight", &cfg.sweep.final_weight);
  }
  if (auto s = r.section("bounds")) {
    s->allow({"lemma_instances", "lemma_max_horizon", "theorem_seeds",
              "theorem_horizons"});
    s->integer("lemma_instances", &cfg.bounds.lemma_instances);
    s->integer("lemma_max_horizon", &cfg.bounds.lemma_max_horizon);
    s->integer("theorem_seeds", &cfg.bounds.theorem_seeds);
    s->int_list("theorem_horizons", &cfg.bounds.theorem_horizons);
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(e.path(), loc.line_of(e.path()), e.message());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file", path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.path(), e.line(), e.message(), path);
  }
}

void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& path, const std::string& msg) {
    throw ConfigError(path, 0, msg);
  };
  ModelPtr model;
  try {
    model = make_model(cfg.model.id, cfg.model.options);
  } catch (const Error& e) {
    fail("model", e.what());
  }
  if (cfg.model.x0.size() != 0 && cfg.model.x0.size() != model->state_dim()) {
    fail("model.x0", "expected " + std::to_string(model->state_dim()) +
                         " entries");
  }
  if (cfg.horizon < 1) fail("horizon", "must be at least 1");

  const int d = model->target_dim();
  const auto& tg = cfg.target;
  if (tg.launch_position.size() != d) {
    fail("target.launch_position",
         "expected " + std::to_string(d) + " entries (model target dimension)");
  }
  if (tg.launch_velocity.size() != d) {
    fail("target.launch_velocity", "expected " + std::to_string(d) + " entries");
  }
  if (tg.gravity.size() != d) {
    fail("target.gravity", "expected " + std::to_string(d) + " entries");
  }
  if (!(tg.position_std >= 0)) fail("target.position_std", "must be >= 0");
  if (!(tg.velocity_std >= 0)) fail("target.velocity_std", "must be >= 0");
  if (!(tg.process_noise >= 0)) fail("target.process_noise", "must be >= 0");

  const auto& ob = cfg.observations;
  if (ob.start < 0) fail("observations.start", "must be >= 0");
  if (ob.every < 1) fail("observations.every", "must be >= 1");
  if (ob.stop < -1) fail("observations.stop", "must be >= -1");
  if (!(ob.noise > 0)) fail("observations.noise", "must be > 0");

  const auto& fc = cfg.forecaster;
  if (fc.kind != "ballistic" && fc.kind != "gmm") {
    fail("forecaster.kind", "expected \"ballistic\" or \"gmm\"");
  }
  if (fc.components < 1) fail("forecaster.components", "must be >= 1");
  if (fc.min_observations < 2) {
    fail("forecaster.min_observations", "must be >= 2");
  }
  if (fc.gmm.restarts < 1) fail("forecaster.restarts", "must be >= 1");
  if (fc.gmm.max_iters < 1) fail("forecaster.max_iters", "must be >= 1");
  if (!(fc.gmm.tol > 0)) fail("forecaster.tol", "must be > 0");

  const auto& ad = cfg.adjust;
  if (!(ad.threshold >= 0)) fail("adjust.threshold", "must be >= 0");
  if (!(ad.desirability.cost_shift_clamp > 0)) {
    fail("adjust.cost_shift_clamp", "must be > 0");
  }
  if (!(ad.desirability.condition_limit >= 1)) {
    fail("adjust.condition_limit", "must be >= 1");
  }
  if (!(ad.desirability.ridge > 0)) fail("adjust.ridge", "must be > 0");

  if (!(cfg.belief.process_noise >= 0)) {
    fail("belief.process_noise", "must be >= 0");
  }
  if (cfg.belief.kl_samples < 1) fail("belief.kl_samples", "must be >= 1");

  const auto& s = cfg.solver;
  if (s.max_iters < 1) fail("solver.max_iters", "must be >= 1");
  if (!(s.tol > 0)) fail("solver.tol", "must be > 0");
  if (!(s.reg_min > 0)) fail("solver.reg_min", "must be > 0");
  if (!(s.reg_init >= s.reg_min)) fail("solver.reg_init", "must be >= reg_min");
  if (!(s.reg_max > s.reg_init)) fail("solver.reg_max", "must be > reg_init");
  if (!(s.reg_increase > 1)) fail("solver.reg_increase", "must be > 1");
  if (!(s.reg_decrease > 0 && s.reg_decrease < 1)) {
    fail("solver.reg_decrease", "must be in (0, 1)");
  }
  if (s.line_search_steps < 1) fail("solver.line_search_steps", "must be >= 1");
  if (!(s.accept_ratio >= 0)) fail("solver.accept_ratio", "must be >= 0");

  static const std::set<std::string> kMethods = {"oracle", "multirun_ddp",
                                                 "retro", "no_adjust"};
  if (cfg.methods.empty()) fail("methods", "must list at least one method");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    const std::string p = "methods[" + std::to_string(i) + "]";
    if (!kMethods.count(cfg.methods[i])) {
      fail(p, "unknown method \"" + cfg.methods[i] + "\"");
    }
    if (!seen.insert(cfg.methods[i]).second) fail(p, "duplicate method");
  }

  if (cfg.output.format != "json" && cfg.output.format != "csv") {
    fail("output.format", "expected \"json\" or \"csv\"");
  }

  const auto& b = cfg.benchmark;
  if (b.dims.empty()) fail("benchmark.dims", "must not be empty");
  for (std::size_t i = 0; i < b.dims.size(); ++i) {
    if (b.dims[i] < 4) {
      fail("benchmark.dims[" + std::to_string(i) + "]", "must be >= 4");
    }
  }
  if (b.horizon < 2) fail("benchmark.horizon", "must be >= 2");
  if (b.repetitions < 1) fail("benchmark.repetitions", "must be >= 1");
  if (b.warmup < 0) fail("benchmark.warmup", "must be >= 0");
  if (b.seeds < 1) fail("benchmark.seeds", "must be >= 1");

  const auto& sw = cfg.sweep;
  if (sw.horizons.empty()) fail("sweep.horizons", "must not be empty");
  for (std::size_t i = 0; i < sw.horizons.size(); ++i) {
    if (sw.horizons[i] < 2) {
      fail("sweep.horizons[" + std::to_string(i) + "]", "must be >= 2");
    }
  }
  if (sw.seeds < 1) fail("sweep.seeds", "must be >= 1");
  if (!(sw.duration > 0)) fail("sweep.duration", "must be > 0");
  if (!(sw.control_weight > 0)) fail("sweep.control_weight", "must be > 0");
  if (!(sw.tracking_weight >= 0)) fail("sweep.tracking_weight", "must be >= 0");
  if (!(sw.final_weight > 0)) fail("sweep.final_weight", "must be > 0");

  const auto& bd = cfg.bounds;
  if (bd.lemma_instances < 1) fail("bounds.lemma_instances", "must be >= 1");
  if (bd.lemma_max_horizon < 2) fail("bounds.lemma_max_horizon", "must be >= 2");
  if (bd.theorem_seeds < 1) fail("bounds.theorem_seeds", "must be >= 1");
  if (bd.theorem_horizons.empty()) {
    fail("bounds.theorem_horizons", "must not be empty");
  }
  for (std::size_t i = 0; i < bd.theorem_horizons.size(); ++i) {
    if (bd.theorem_horizons[i] < 2) {
      fail("bounds.theorem_horizons[" + std::to_string(i) + "]",
           "must be >= 2");
    }
  }
}

json to_json(const ScenarioConfig& cfg) {
  json j;
  const ModelOptions& o = cfg.model.options;
  const ModelPtr model = make_model(cfg.model.id, o);
  const CostWeights& w = model->weights();
  j["model"] = {
      {"id", cfg.model.id},
      {"dt", o.dt},
      {"mass", o.mass},
      {"sigma", o.sigma},
      {"x0", vector_json(cfg.model.x0)},
      {"R", matrix_json(w.R)},
      {"W", matrix_json(w.W)},
      {"W_final", matrix_json(w.W_final)},
      {"augmented_dim", o.augmented_dim},
      {"filter_beta", o.filter_beta},
      {"arm",
       {{"l1", o.arm.l1},
        {"l2", o.arm.l2},
        {"m1", o.arm.m1},
        {"m2", o.arm.m2},
        {"damping", o.arm.damping},
        {"gravity", o.arm.gravity},
        {"base_x", o.arm.base_x},
        {"base_y", o.arm.base_y}}}};
  j["horizon"] = cfg.horizon;
  j["target"] = {{"launch_position", vector_json(cfg.target.launch_position)},
                 {"launch_velocity", vector_json(cfg.target.launch_velocity)},
                 {"position_std", cfg.target.position_std},
                 {"velocity_std", cfg.target.velocity_std},
                 {"gravity", vector_json(cfg.target.gravity)},
                 {"process_noise", cfg.target.process_noise}};
  j["observations"] = {{"start", cfg.observations.start},
                       {"every", cfg.observations.every},
                       {"stop", cfg.observations.stop},
                       {"noise", cfg.observations.noise},
                       {"replay", cfg.observations.replay}};
  j["forecaster"] = {{"kind", cfg.forecaster.kind},
                     {"components", cfg.forecaster.components},
                     {"min_observations", cfg.forecaster.min_observations},
                     {"restarts", cfg.forecaster.gmm.restarts},
                     {"max_iters", cfg.forecaster.gmm.max_iters},
                     {"tol", cfg.forecaster.gmm.tol},
                     {"seed", cfg.forecaster.gmm.seed}};
  j["adjust"] = {
      {"threshold", cfg.adjust.threshold},
      {"gradient", gradient_name(cfg.adjust.gradient)},
      {"cost_shift_clamp", cfg.adjust.desirability.cost_shift_clamp},
      {"condition_limit", cfg.adjust.desirability.condition_limit},
      {"ridge", cfg.adjust.desirability.ridge}};
  j["belief"] = {{"process_noise", cfg.belief.process_noise},
                 {"kl_samples", cfg.belief.kl_samples},
                 {"kl_seed", cfg.belief.kl_seed}};
  const DdpOptions& d = cfg.solver;
  j["solver"] = {{"max_iters", d.max_iters},
                 {"tol", d.tol},
                 {"reg_init", d.reg_init},
                 {"reg_min", d.reg_min},
                 {"reg_max", d.reg_max},
                 {"reg_increase", d.reg_increase},
                 {"reg_decrease", d.reg_decrease},
                 {"line_search_steps", d.line_search_steps},
                 {"accept_ratio", d.accept_ratio},
                 {"full_ddp", d.full_ddp}};
  j["seed"] = cfg.seed;
  j["methods"] = cfg.methods;
  j["output"] = {{"dir", cfg.output.dir},
                 {"format", cfg.output.format},
                 {"event_log", cfg.output.event_log}};
  j["benchmark"] = {{"dims", cfg.benchmark.dims},
                    {"horizon", cfg.benchmark.horizon},
                    {"repetitions", cfg.benchmark.repetitions},
                    {"warmup", cfg.benchmark.warmup},
                    {"seeds", cfg.benchmark.seeds}};
  j["sweep"] = {{"horizons", cfg.sweep.horizons},
                {"seeds", cfg.sweep.seeds},
                {"duration", cfg.sweep.duration},
                {"shift_scale", cfg.sweep.shift_scale},
                {"control_weight", cfg.sweep.control_weight},
                {"tracking_weight", cfg.sweep.tracking_weight},
                {"final_weight", cfg.sweep.final_weight}};
  j["bounds"] = {{"lemma_instances", cfg.bounds.lemma_instances},
                 {"lemma_max_horizon", cfg.bounds.lemma_max_horizon},
                 {"theorem_seeds", cfg.bounds.theorem_seeds},
                 {"theorem_horizons", cfg.bounds.theorem_horizons}};
  return j;
}

}  // namespace retro
