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

// Scenario configuration: a strict JSON document with nested sections.
// Every key is optional and defaults to the values below; unknown keys and
// type errors are rejected with the dotted field path and source line.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "retro/adjust.hpp"
#include "retro/belief.hpp"
#include "retro/ddp.hpp"
#include "retro/dynamics.hpp"

namespace retro {

class ConfigError : public Error {
 public:
  // what() reads "<file>:<line>: <path>: <message>" with absent parts
  // omitted ("config" stands in for a missing file name).
  ConfigError(const std::string& path, int line, const std::string& message,
              const std::string& file = "");
  const std::string& path() const { return path_; }
  int line() const { return line_; }
  const std::string& message() const { return message_; }
  const std::string& file() const { return file_; }

 private:
  std::string path_;
  int line_;
  std::string message_;
  std::string file_;
};

struct ModelConfig {
  std::string id = "double_integrator_2d";
  ModelOptions options;
  Vector x0;  // empty: model rest state (arm: configured joint angles)
};

struct TargetConfig {
  Vector launch_position = Eigen::Vector2d(3.0, 0.0);
  Vector launch_velocity = Eigen::Vector2d(-1.0, 9.81);
  double position_std = 0.05;
  double velocity_std = 0.3;
  Vector gravity = Eigen::Vector2d(0.0, -9.81);
  double process_noise = 0.0;  // acceleration std of the true ball
};

struct ObservationConfig {
  int start = 1;
  int every = 1;
  int stop = -1;  // inclusive; -1 means T-1
  double noise = 0.02;
  std::string replay;  // CSV replay (t, y1..yd, noise); empty: simulate
};

struct ForecasterConfig {
  std::string kind = "ballistic";  // ballistic | gmm
  int components = 2;
  int min_observations = 3;
  GmmOptions gmm;
};

struct AdjustConfig {
  double threshold = 0.05;
  GradientMode gradient = GradientMode::kAnalytic;
  DesirabilityOptions desirability;
};

struct BeliefConfig {
  double process_noise = 0.0;  // filter's acceleration std
  int kl_samples = 100000;
  std::uint64_t kl_seed = 0;
};

struct OutputConfig {
  std::string dir = "retro_out";
  std::string format = "json";  // json | csv
  bool event_log = true;
};

struct BenchmarkConfig {
  std::vector<int> dims = {4, 7, 10, 13};
  int horizon = 200;
  int repetitions = 20;
  int warmup = 2;
  int seeds = 1;
};

struct SweepConfig {
  std::vector<int> horizons = {10, 20, 50, 100, 200, 500, 1000};
  int seeds = 20;
  double duration = 2.0;
  double shift_scale = 20.0;
  double control_weight = 1.0;
  double tracking_weight = 1.0;
  double final_weight = 1.0;
};

struct BoundsConfig {
  int lemma_instances = 1000;
  int lemma_max_horizon = 64;
  int theorem_seeds = 100;
  std::vector<int> theorem_horizons = {10, 50, 100, 500};
};

struct ScenarioConfig {
  ModelConfig model;
  int horizon = 200;
  TargetConfig target;
  ObservationConfig observations;
  ForecasterConfig forecaster;
  AdjustConfig adjust;
  BeliefConfig belief;
  DdpOptions solver;
  std::uint64_t seed = 0;
  std::vector<std::string> methods = {"oracle", "multirun_ddp", "retro",
                                      "no_adjust"};
  OutputConfig output;
  BenchmarkConfig benchmark;
  SweepConfig sweep;
  BoundsConfig bounds;
};

// Throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Checks cross-field constraints; throws ConfigError.
void validate(const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace retro
