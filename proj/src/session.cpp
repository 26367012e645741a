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

#include "retro/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

namespace retro {

namespace {

double elapsed_us(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::micro>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

BeliefTrajectory KalmanForecaster::update(const BeliefTrajectory& current,
                                          const Observation& obs) const {
  return observe_and_update(current, obs);
}

GmmForecaster::GmmForecaster(int components, BallisticModel model,
                             GmmOptions opts, int min_observations)
    : components_(components),
      model_(std::move(model)),
      opts_(opts),
      min_observations_(std::max(min_observations, components)) {}

BeliefTrajectory GmmForecaster::update(const BeliefTrajectory& current,
                                       const Observation& obs) const {
  BeliefTrajectory out = current;
  out.add_history(obs);
  if (static_cast<int>(out.history().size()) < min_observations_) return out;
  const GmmForecast fit = forecast_gmm(out.history(), components_,
                                       current.horizon(), model_, opts_);
  auto& steps = out.mutable_steps();
  for (int t = obs.t; t <= current.horizon(); ++t) {
    steps[t] = fit.belief.at(t);
  }
  return out;
}

ShiftTrigger::ShiftTrigger(BeliefTrajectory reference, double threshold,
                           KlOptions kl)
    : reference_(std::move(reference)), threshold_(threshold), kl_(kl) {}

KlEstimate ShiftTrigger::measure(const BeliefTrajectory& posterior) const {
  return kl_shift(posterior, reference_, reference_.horizon(), kl_);
}

AdjustmentOutcome adjust_for_shift(const SystemModel& model,
                                   const NominalTrajectory& nominal,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior, int k,
                                   GradientMode mode,
                                   const LinearizationCache* cache,
                                   const DesirabilityOptions& opts) {
  const int T = nominal.horizon();
  const int first = k + 1;
  const CostShiftVector dl =
      delta_running_cost(nominal, prior, posterior, model, first, opts);
  const std::vector<double> w = predictive_weights(prior, posterior, first, T);
  AdjustmentOutcome out;
  out.solution = solve_desirability(build_M(dl, w), dl, opts);
  out.gradient = value_gradient(out.solution, prior, posterior, nominal,
                                model, mode, opts);
  out.adjustment =
      control_adjustment(out.gradient, first, nominal, model, cache);
  return out;
}

RetroSession::RetroSession(ModelPtr model, SolveReport plan,
                           BeliefTrajectory prior,
                           std::shared_ptr<const Forecaster> forecaster,
                           RetroOptions opts)
    : model_(std::move(model)),
      plan_(std::move(plan)),
      planning_prior_(prior),
      posterior_(prior),
      forecaster_(std::move(forecaster)),
      opts_(opts),
      trigger_(std::move(prior), opts.threshold, opts.kl),
      cache_(LinearizationCache::build(plan_.trajectory, *model_)),
      controls_(plan_.trajectory.controls) {
  if (planning_prior_.horizon() != plan_.trajectory.horizon()) {
    throw DimensionError("session: prior and plan horizons differ");
  }
}

RetroSession::StepResult RetroSession::step(
    int t, const std::optional<Observation>& obs) {
  const int T = plan_.trajectory.horizon();
  if (t < 0 || t >= T) throw Error("session step outside horizon");
  StepResult result;
  if (obs) {
    const auto start = std::chrono::steady_clock::now();
    posterior_ = forecaster_->update(posterior_, *obs);
    const KlEstimate kl = trigger_.measure(posterior_);
    belief_time_us_ += elapsed_us(start);

    if (trigger_.exceeds(kl)) {
      ShiftEvent ev;
      ev.t = t;
      ev.kl = kl.value;
      ev.kl_std_error = kl.std_error;
      ev.prior_means = trigger_.reference().means();
      ev.posterior_means = posterior_.means();
      const std::uint64_t solves_before = desirability_solve_count();
      const auto event_start = std::chrono::steady_clock::now();
      try {
        AdjustmentOutcome adj =
            adjust_for_shift(*model_, plan_.trajectory, planning_prior_,
                             posterior_, t, opts_.gradient, &cache_,
                             opts_.desirability);
        for (int s = t; s < T; ++s) controls_[s] = adj.adjustment.controls[s];
        ev.wall_time_us = elapsed_us(event_start);
        ev.condition = adj.solution.condition;
        ev.ill_conditioned = adj.solution.ill_conditioned;
        double sq = 0.0;
        for (const Vector& du : adj.adjustment.delta_u) sq += du.squaredNorm();
        ev.du_norm = std::sqrt(sq);
        last_solution_ = std::move(adj.solution);
        trigger_.rebase(posterior_);
      } catch (const Error& e) {
        ev.wall_time_us = elapsed_us(event_start);
        ev.failed = true;
        ev.error = e.what();
      }
      ev.linear_solves =
          static_cast<int>(desirability_solve_count() - solves_before);
      events_.push_back(ev);
      result.event = std::move(ev);
    }
  }
  result.control = controls_[t];
  return result;
}

}  // namespace retro
