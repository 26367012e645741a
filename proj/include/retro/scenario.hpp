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

// Moving-target interception: a ballistic ball, an observation stream, and
// four planners run on the same stream.
//
//   oracle        DDP against the true ball trajectory
//   no_adjust     the plan against the prior, executed unchanged
//   retro         the plan, fine-tuned by the value update on each shift
//   multirun_ddp  DDP re-solved from zero controls on each shift

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "retro/config.hpp"
#include "retro/regret.hpp"
#include "retro/session.hpp"

namespace retro {

inline constexpr const char* kVersion = "1.0.0";

struct TargetRealization {
  Vector launch_state;  // (position, velocity)
  PointSeries truth;    // positions at t = 0..T
  std::vector<Observation> observations;
};

// Ballistic truth and noisy observations on the configured schedule.
// Deterministic per (config, seed).
TargetRealization generate_target(const ScenarioConfig& cfg,
                                  std::uint64_t seed);

// Reads "t,y1,..,yd,noise" rows; a non-numeric first row is a header.
// Throws Error with the path and line on malformed input.
std::vector<Observation> load_replay(const std::string& path, int dim);

BallisticModel filter_model(const ScenarioConfig& cfg);
BeliefTrajectory planning_prior(const ScenarioConfig& cfg);
std::shared_ptr<const Forecaster> make_forecaster(const ScenarioConfig& cfg);
Vector initial_state(const ScenarioConfig& cfg, const SystemModel& model);

struct MethodReport {
  std::string method;
  bool ok = true;
  std::string error;
  std::vector<Vector> states;    // executed x_0..x_T
  std::vector<Vector> controls;  // executed u_0..u_{T-1}
  double final_error = 0.0;      // |C(x_T) - truth_T|
  double total_cost = 0.0;       // cost of the executed run against the truth
  std::vector<ShiftEvent> events;
  double plan_time_us = 0.0;
  double belief_time_us = 0.0;
  double adjust_time_us = 0.0;   // sum of event wall times
  double total_time_us = 0.0;
  int ddp_iterations = 0;
  std::optional<RegretReport> regret;  // retro and no_adjust
};

struct RunReport {
  std::string version = kVersion;
  std::uint64_t seed = 0;
  ScenarioConfig config;
  TargetRealization target;
  bool replayed = false;
  std::vector<MethodReport> methods;

  // Solver outputs kept for analysis; not serialized.
  SolveReport plan;
  SolveReport oracle;

  const MethodReport* find(const std::string& method) const;
};

using EventSink =
    std::function<void(const std::string& method, const ShiftEvent& event)>;

// Runs the configured methods on one target realization. Solver failures
// are recorded per method. Throws ConfigError for an invalid config.
RunReport run_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                       const EventSink& sink = nullptr);

}  // namespace retro
