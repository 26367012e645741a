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

// Online loop: observe, update the posterior, test the KL shift against a
// threshold, fine-tune the remaining controls, execute.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "retro/adjust.hpp"
#include "retro/belief.hpp"
#include "retro/ddp.hpp"

namespace retro {

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  // Posterior after adding obs to `current`.
  virtual BeliefTrajectory update(const BeliefTrajectory& current,
                                  const Observation& obs) const = 0;
};

class KalmanForecaster : public Forecaster {
 public:
  std::string name() const override { return "ballistic"; }
  BeliefTrajectory update(const BeliefTrajectory& current,
                          const Observation& obs) const override;
};

// Refits the ballistic mixture on the whole observation history. Steps
// before the newest observation keep their previous beliefs.
class GmmForecaster : public Forecaster {
 public:
  GmmForecaster(int components, BallisticModel model, GmmOptions opts,
                int min_observations = 3);
  std::string name() const override { return "gmm"; }
  BeliefTrajectory update(const BeliefTrajectory& current,
                          const Observation& obs) const override;

 private:
  int components_;
  BallisticModel model_;
  GmmOptions opts_;
  int min_observations_;
};

// Threshold test shared by every method that reacts to belief shifts.
class ShiftTrigger {
 public:
  ShiftTrigger(BeliefTrajectory reference, double threshold, KlOptions kl);

  // KL of the posterior against the reference at the terminal step.
  KlEstimate measure(const BeliefTrajectory& posterior) const;
  bool exceeds(const KlEstimate& kl) const { return kl.value > threshold_; }
  void rebase(const BeliefTrajectory& posterior) { reference_ = posterior; }
  const BeliefTrajectory& reference() const { return reference_; }
  double threshold() const { return threshold_; }

 private:
  BeliefTrajectory reference_;
  double threshold_;
  KlOptions kl_;
};

struct ShiftEvent {
  int t = 0;
  double kl = 0.0;
  double kl_std_error = 0.0;
  double condition = 1.0;
  double du_norm = 0.0;
  double wall_time_us = 0.0;
  bool ill_conditioned = false;
  bool failed = false;
  std::string error;
  int linear_solves = 0;
  int ddp_iterations = 0;  // multirun re-solves only
  std::vector<Vector> prior_means;      // trigger reference before the event
  std::vector<Vector> posterior_means;  // posterior at the event
};

struct RetroOptions {
  double threshold = 0.05;
  KlOptions kl;
  GradientMode gradient = GradientMode::kAnalytic;
  DesirabilityOptions desirability;
};

class RetroSession {
 public:
  // `plan` is the DDP solution against the planning prior.
  RetroSession(ModelPtr model, SolveReport plan, BeliefTrajectory prior,
               std::shared_ptr<const Forecaster> forecaster,
               RetroOptions opts = {});

  struct StepResult {
    Vector control;
    std::optional<ShiftEvent> event;
  };

  // One loop iteration at step t, before executing u_t.
  StepResult step(int t, const std::optional<Observation>& obs);

  const std::vector<Vector>& controls() const { return controls_; }
  const std::vector<ShiftEvent>& events() const { return events_; }
  const BeliefTrajectory& posterior() const { return posterior_; }
  const SolveReport& plan() const { return plan_; }
  const std::optional<DesirabilitySolution>& last_solution() const {
    return last_solution_;
  }
  double belief_time_us() const { return belief_time_us_; }

 private:
  ModelPtr model_;
  SolveReport plan_;
  BeliefTrajectory planning_prior_;
  BeliefTrajectory posterior_;
  std::shared_ptr<const Forecaster> forecaster_;
  RetroOptions opts_;
  ShiftTrigger trigger_;
  LinearizationCache cache_;
  std::vector<Vector> controls_;
  std::vector<ShiftEvent> events_;
  std::optional<DesirabilitySolution> last_solution_;
  double belief_time_us_ = 0.0;
};

struct AdjustmentOutcome {
  DesirabilitySolution solution;
  std::vector<Vector> gradient;
  AdjustmentResult adjustment;
};

// The full adjustment for an event at step k: window k+1..T against the
// nominal of `plan`.
AdjustmentOutcome adjust_for_shift(const SystemModel& model,
                                   const NominalTrajectory& nominal,
                                   const BeliefTrajectory& prior,
                                   const BeliefTrajectory& posterior, int k,
                                   GradientMode mode = GradientMode::kAnalytic,
                                   const LinearizationCache* cache = nullptr,
                                   const DesirabilityOptions& opts = {});

}  // namespace retro
