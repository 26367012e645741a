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

// Regret of the adjusted value function against an oracle that knows the
// true target trajectory, the normalization-term bound, and timing studies.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "retro/adjust.hpp"
#include "retro/config.hpp"
#include "retro/ddp.hpp"

namespace retro {

struct RegretReport {
  std::vector<double> R;  // R[t-1] for t = 1..T
  double bound = 0.0;     // alpha_bound(T) + log T
  double total_regret = 0.0;
  double max_regret = 0.0;
  std::vector<int> violations;  // steps t with R_t > bound
  double delta_v_m = 0.0;       // dV at the step of largest exp(-dV)
  int m = 0;
};

// DDP against the true target trajectory.
SolveReport oracle_solve(const SystemModel& model, const Vector& x0,
                         const PointSeries& true_targets,
                         const DdpOptions& opts = {});

// R_t = |V_t + dV_t - V*_t| for t = 1..T. dV is zero outside the
// solution's window (or everywhere when `adjusted` is null).
RegretReport regret_series(const ValueTrace& nominal,
                           const DesirabilitySolution* adjusted,
                           const ValueTrace& oracle);

struct Lemma1Check {
  bool holds = true;
  double margin = 0.0;   // T exp(-dV_m) - max_t g_t
  double max_g = 0.0;
  double delta_v_m = 0.0;
  int m = 0;             // time index of dV_m
};

// max_t g_t <= T exp(-dV_m) with dV_m the value shift of largest exp(-dV).
Lemma1Check check_lemma1(const DesirabilitySolution& sol, int T);

// ---------------------------------------------------------------------------
// Belief schedules whose per-step KL is at most alpha_bound(T): prior
// N(mu_t, 1), posterior N(mu_t + b/T, (1 + a/T)^2) with a in [0, 1] and
// b in [-1, 1], on the scalar integrator x' = x + u with unit weights.

struct ConformingRun {
  int T = 0;
  double a = 0.0;
  double b = 0.0;
  double max_step_kl = 0.0;
  RegretReport regret;
  Lemma1Check lemma1;
};

ConformingRun run_conforming_scenario(int T, std::uint64_t seed,
                                      const DdpOptions& opts = {});

// ---------------------------------------------------------------------------
// Horizon sweep: a double integrator over a fixed duration with dt = D/T,
// time-scaled running weights and a target translation of length
// shift_scale * b / T (b uniform in [0.5, 1], random direction), adjusted
// once at k = 0.

struct SweepRow {
  int T = 0;
  double cost_diff = 0.0;     // J_adjusted - J_oracle, mean over seeds
  double total_regret = 0.0;  // sum_t R_t, mean over seeds
  double bound = 0.0;
  int violations = 0;
  bool valid = true;
};

std::vector<SweepRow> horizon_sweep(const SweepConfig& cfg, std::uint64_t seed,
                                    const DdpOptions& opts = {});

// ---------------------------------------------------------------------------
// Property sweep: the normalization bound on random desirability systems and
// the regret bound on conforming runs.

struct TheoremRow {
  int T = 0;
  int seeds = 0;
  int violations = 0;
  double max_ratio = 0.0;    // max over seeds of max_t R_t / bound
  double max_step_kl = 0.0;  // largest per-step KL seen
};

struct BoundsReport {
  int lemma_instances = 0;
  std::vector<int> lemma_violations;  // instance indices
  double lemma_min_margin = 0.0;
  std::vector<TheoremRow> theorem;
  std::vector<std::pair<int, int>> theorem_violations;  // (T, seed index)
};

BoundsReport check_bounds(const BoundsConfig& cfg, std::uint64_t seed,
                          const DdpOptions& opts = {});

// ---------------------------------------------------------------------------
// Timing.

struct ComplexityRecord {
  std::string method;  // oracle_ddp | multirun_ddp | retro
  int T = 0;
  int n = 0;
  int m = 0;
  std::vector<double> event_time_us;  // per matched event, median of reps
  double event_median_us = 0.0;
  double total_time_us = 0.0;         // median epoch time
  double cost_diff = 0.0;             // total cost minus the oracle's
  double iterations = 0.0;            // mean DDP iterations per event (1 for retro)
  int events = 0;
};

// Median wall time in microseconds of fn over `reps` runs after `warmup`.
double median_time_us(const std::function<void()>& fn, int reps, int warmup);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs the interception scenario for each state dimension in
// cfg.benchmark.dims (arm_augmented model) at horizon cfg.benchmark.horizon
// and times the three planners.
std::vector<ComplexityRecord> complexity_benchmark(const ScenarioConfig& cfg,
                                                   std::uint64_t seed);

}  // namespace retro
