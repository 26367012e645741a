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

#include "retro/regret.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "retro/scenario.hpp"
#include "retro/session.hpp"

namespace retro {

namespace {

using Clock = std::chrono::steady_clock;

BeliefTrajectory gaussian_trajectory(const PointSeries& means, double std) {
  std::vector<GaussianMixture> steps;
  steps.reserve(means.size());
  for (const Vector& m : means) {
    const int d = static_cast<int>(m.size());
    steps.push_back(GaussianMixture::single(
        {m, std * std * Matrix::Identity(d, d)}));
  }
  return BeliefTrajectory(std::move(steps));
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SolveReport oracle_solve(const SystemModel& model, const Vector& x0,
                         const PointSeries& true_targets,
                         const DdpOptions& opts) {
  return solve(model, x0, true_targets, opts);
}

RegretReport regret_series(const ValueTrace& nominal,
                           const DesirabilitySolution* adjusted,
                           const ValueTrace& oracle) {
  if (nominal.V.size() != oracle.V.size() || nominal.V.size() < 2) {
    throw DimensionError("regret_series: value traces differ in length");
  }
  const int T = static_cast<int>(nominal.V.size()) - 1;
  RegretReport rep;
  rep.bound = alpha_bound(T) + std::log(static_cast<double>(T));
  rep.R.reserve(T);
  for (int t = 1; t <= T; ++t) {
    double dv = 0.0;
    if (adjusted && t >= adjusted->first && t <= adjusted->last()) {
      dv = adjusted->delta_v[t - adjusted->first];
    }
    const double r = std::abs(nominal.V[t] + dv - oracle.V[t]);
    rep.R.push_back(r);
    rep.total_regret += r;
    rep.max_regret = std::max(rep.max_regret, r);
    if (r > rep.bound) rep.violations.push_back(t);
  }
  if (adjusted && adjusted->size() > 0) {
    const auto it =
        std::min_element(adjusted->delta_v.begin(), adjusted->delta_v.end());
    rep.delta_v_m = *it;
    rep.m = adjusted->first +
            static_cast<int>(std::distance(adjusted->delta_v.begin(), it));
  }
  return rep;
}

Lemma1Check check_lemma1(const DesirabilitySolution& sol, int T) {
  Lemma1Check c;
  if (sol.size() == 0) return c;
  const auto it = std::min_element(sol.delta_v.begin(), sol.delta_v.end());
  c.delta_v_m = *it;
  c.m = sol.first + static_cast<int>(std::distance(sol.delta_v.begin(), it));
  c.max_g = *std::max_element(sol.g.begin(), sol.g.end());
  const double bound = T * std::exp(-c.delta_v_m);
  c.margin = bound - c.max_g;
  c.holds = c.max_g <= bound;
  return c;
}

ConformingRun run_conforming_scenario(int T, std::uint64_t seed,
                                      const DdpOptions& opts) {
  if (T < 2) throw Error("conforming scenario: T must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConformingRun run;
  run.T = T;
  run.a = unit(rng);
  run.b = 2.0 * unit(rng) - 1.0;
  const double level = 2.0 * unit(rng) - 1.0;
  const double amp = 0.05 * unit(rng);
  const double phase = 2.0 * std::numbers::pi * unit(rng);

  // A slowly varying target the integrator follows closely from x0 = mu_0.
  PointSeries prior_means;
  PointSeries post_means;
  for (int t = 0; t <= T; ++t) {
    const double s = static_cast<double>(t) / T;
    Vector mu(1);
    mu(0) = level + amp * std::sin(2.0 * std::numbers::pi * s + phase);
    prior_means.push_back(mu);
    post_means.push_back(mu + Vector::Constant(1, run.b / T));
  }
  const BeliefTrajectory prior = gaussian_trajectory(prior_means, 1.0);
  const BeliefTrajectory posterior =
      gaussian_trajectory(post_means, 1.0 + run.a / T);
  for (int t = 0; t <= T; ++t) {
    run.max_step_kl =
        std::max(run.max_step_kl, kl_shift(posterior, prior, t).value);
  }

  const ModelPtr model = make_scalar_lti();
  const Vector x0 = prior_means.front();
  const SolveReport plan = solve(*model, x0, prior_means, opts);
  const SolveReport oracle = oracle_solve(*model, x0, post_means, opts);
  const AdjustmentOutcome adj =
      adjust_for_shift(*model, plan.trajectory, prior, posterior, 0);
  run.regret = regret_series(plan.value_trace, &adj.solution,
                             oracle.value_trace);
  run.lemma1 = check_lemma1(adj.solution, T);
  return run;
}

std::vector<SweepRow> horizon_sweep(const SweepConfig& cfg, std::uint64_t seed,
                                    const DdpOptions& opts) {
  std::vector<SweepRow> rows;
  for (int T : cfg.horizons) {
    const double dt = cfg.duration / T;
    ModelOptions mo;
    mo.dt = dt;
    mo.R = cfg.control_weight * dt * Matrix::Identity(2, 2);
    mo.W = cfg.tracking_weight * dt * Matrix::Identity(2, 2);
    mo.W_final = cfg.final_weight * Matrix::Identity(2, 2);
    const ModelPtr model = make_double_integrator_2d(mo);
    const Vector x0 = Vector::Zero(4);

    // The same physical target path at every resolution.
    PointSeries prior_means;
    for (int t = 0; t <= T; ++t) {
      const double tau = t * dt;
      prior_means.push_back(Eigen::Vector2d(1.0 - 0.2 * tau, 0.5 + 0.3 * tau));
    }
    const BeliefTrajectory prior = gaussian_trajectory(prior_means, 1.0);
    const SolveReport plan = solve(*model, x0, prior_means, opts);
    const LinearizationCache cache =
        LinearizationCache::build(plan.trajectory, *model);

    SweepRow row;
    row.T = T;
    row.bound = alpha_bound(T) + std::log(static_cast<double>(T));
    for (int s = 0; s < cfg.seeds; ++s) {
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(s));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double mag = 0.5 + 0.5 * unit(rng);
      const double angle = 2.0 * std::numbers::pi * unit(rng);
      const Vector shift =
          cfg.shift_scale * mag / T *
          Eigen::Vector2d(std::cos(angle), std::sin(angle));
      PointSeries post_means = prior_means;
      for (Vector& m : post_means) m += shift;
      const BeliefTrajectory posterior = gaussian_trajectory(post_means, 1.0);

      try {
        const AdjustmentOutcome adj = adjust_for_shift(
            *model, plan.trajectory, prior, posterior, 0,
            GradientMode::kAnalytic, &cache);
        const SolveReport oracle = oracle_solve(*model, x0, post_means, opts);
        const NominalTrajectory executed =
            rollout(*model, x0, adj.adjustment.controls, post_means);
        row.cost_diff +=
            (executed.total_cost - oracle.trajectory.total_cost) / cfg.seeds;
        const RegretReport rr =
            regret_series(plan.value_trace, &adj.solution, oracle.value_trace);
        row.total_regret += rr.total_regret / cfg.seeds;
        row.violations += static_cast<int>(rr.violations.size());
      } catch (const Error&) {
        row.valid = false;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

double median_time_us(const std::function<void()>& fn, int reps, int warmup) {
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> times;
  times.reserve(std::max(reps, 1));
  for (int i = 0; i < std::max(reps, 1); ++i) {
    const auto start = Clock::now();
    fn();
    times.push_back(
        std::chrono::duration<double, std::micro>(Clock::now() - start)
            .count());
  }
  return median(times);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error("loglog_slope: need at least two matching points");
  }
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw Error("loglog_slope: non-positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw Error("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

std::vector<ComplexityRecord> complexity_benchmark(const ScenarioConfig& base,
                                                   std::uint64_t seed) {
  const BenchmarkConfig& bc = base.benchmark;
  std::vector<ComplexityRecord> out;
  for (int n : bc.dims) {
    ScenarioConfig cfg = base;
    cfg.model.id = "arm_augmented";
    cfg.model.options.augmented_dim = n;
    cfg.model.x0 = Vector();
    cfg.horizon = bc.horizon;
    cfg.methods = {"oracle", "retro", "multirun_ddp"};
    const ModelPtr model = make_model(cfg.model.id, cfg.model.options);
    const Vector x0 = initial_state(cfg, *model);
    const BeliefTrajectory prior = planning_prior(cfg);
    const auto forecaster = make_forecaster(cfg);

    auto record = [&](const char* method) {
      ComplexityRecord r;
      r.method = method;
      r.T = bc.horizon;
      r.n = n;
      r.m = model->control_dim();
      return r;
    };
    ComplexityRecord oracle_rec = record("oracle_ddp");
    ComplexityRecord retro_rec = record("retro");
    ComplexityRecord multi_rec = record("multirun_ddp");
    double oracle_total = 0, retro_total = 0, multi_total = 0;
    double retro_cost = 0, multi_cost = 0;
    double multi_iters = 0;

    for (int s = 0; s < bc.seeds; ++s) {
      const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(s);
      const RunReport run = run_scenario(cfg, run_seed);
      const MethodReport* oracle = run.find("oracle");
      const MethodReport* retro = run.find("retro");
      const MethodReport* multi = run.find("multirun_ddp");
      if (!oracle->ok || !retro->ok || !multi->ok) {
        throw Error("benchmark: a planner failed at n=" + std::to_string(n));
      }
      const PointSeries& truth = run.target.truth;

      const double plan_us = median_time_us(
          [&] { solve(*model, x0, prior.means(), cfg.solver); }, bc.repetitions,
          bc.warmup);
      const double cache_us = median_time_us(
          [&] { LinearizationCache::build(run.plan.trajectory, *model); },
          bc.repetitions, bc.warmup);
      const double oracle_us = median_time_us(
          [&] { oracle_solve(*model, x0, truth, cfg.solver); }, bc.repetitions,
          bc.warmup);
      const LinearizationCache cache =
          LinearizationCache::build(run.plan.trajectory, *model);

      // Replay the shared observation stream to recover each event's
      // posterior, then time both responses to it.
      std::map<int, const ShiftEvent*> multi_events;
      for (const ShiftEvent& e : multi->events) multi_events[e.t] = &e;
      BeliefTrajectory posterior = prior;
      BeliefTrajectory retro_reference = prior;
      std::size_t next_event = 0;
      double retro_events_us = 0, multi_events_us = 0;
      for (const Observation& obs : run.target.observations) {
        posterior = forecaster->update(posterior, obs);
        if (next_event >= retro->events.size()) break;
        const ShiftEvent& ev = retro->events[next_event];
        if (obs.t != ev.t) continue;
        ++next_event;
        const int t = ev.t;
        const double r_us = median_time_us(
            [&] {
              adjust_for_shift(*model, run.plan.trajectory, prior, posterior,
                               t, cfg.adjust.gradient, &cache,
                               cfg.adjust.desirability);
            },
            bc.repetitions, bc.warmup);
        retro_events_us += r_us;
        auto mit = multi_events.find(t);
        if (mit == multi_events.end()) continue;
        const PointSeries means = posterior.means();
        const PointSeries targets(means.begin() + t, means.end());
        const Vector xt = multi->states[t];
        const double m_us = median_time_us(
            [&] { solve(*model, xt, targets, cfg.solver); }, bc.repetitions,
            bc.warmup);
        multi_events_us += m_us;
        multi_iters += mit->second->ddp_iterations;
        retro_rec.event_time_us.push_back(r_us);
        multi_rec.event_time_us.push_back(m_us);
      }
      oracle_total += oracle_us;
      retro_total += plan_us + cache_us + retro->belief_time_us + retro_events_us;
      multi_total += plan_us + multi->belief_time_us + multi_events_us;
      retro_cost += retro->total_cost - oracle->total_cost;
      multi_cost += multi->total_cost - oracle->total_cost;
      retro_rec.events += static_cast<int>(retro->events.size());
      multi_rec.events += static_cast<int>(multi->events.size());
    }
    const double k = bc.seeds;
    oracle_rec.total_time_us = oracle_total / k;
    oracle_rec.iterations = 0;
    retro_rec.total_time_us = retro_total / k;
    multi_rec.total_time_us = multi_total / k;
    retro_rec.cost_diff = retro_cost / k;
    multi_rec.cost_diff = multi_cost / k;
    retro_rec.iterations = 1.0;
    multi_rec.iterations =
        multi_rec.event_time_us.empty()
            ? 0.0
            : multi_iters / static_cast<double>(multi_rec.event_time_us.size());
    retro_rec.event_median_us = median(retro_rec.event_time_us);
    multi_rec.event_median_us = median(multi_rec.event_time_us);
    out.push_back(oracle_rec);
    out.push_back(retro_rec);
    out.push_back(multi_rec);
  }
  return out;
}

BoundsReport check_bounds(const BoundsConfig& cfg, std::uint64_t seed,
                          const DdpOptions& opts) {
  BoundsReport rep;
  rep.lemma_instances = cfg.lemma_instances;
  rep.lemma_min_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> horizon(2, cfg.lemma_max_horizon);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int i = 0; i < cfg.lemma_instances; ++i) {
    const int T = horizon(rng);
    CostShiftVector dl;
    dl.first = 1;
    std::vector<double> w;
    double total = 0.0;
    for (int t = 1; t <= T; ++t) {
      dl.delta.push_back(shift(rng));
      dl.posterior_cost.push_back(0.0);
      dl.prior_cost.push_back(0.0);
      dl.clamped.push_back(false);
      w.push_back(weight(rng));
      total += w.back();
    }
    for (double& x : w) x /= total;
    const DesirabilitySolution sol = solve_desirability(build_M(dl, w), dl);
    const Lemma1Check c = check_lemma1(sol, T);
    rep.lemma_min_margin = std::min(rep.lemma_min_margin, c.margin);
    if (!c.holds) rep.lemma_violations.push_back(i);
  }

  for (int T : cfg.theorem_horizons) {
    TheoremRow row;
    row.T = T;
    row.seeds = cfg.theorem_seeds;
    for (int s = 0; s < cfg.theorem_seeds; ++s) {
      const std::uint64_t run_seed =
          seed * 7919ULL + static_cast<std::uint64_t>(T) * 100003ULL +
          static_cast<std::uint64_t>(s);
      const ConformingRun run = run_conforming_scenario(T, run_seed, opts);
      row.max_step_kl = std::max(row.max_step_kl, run.max_step_kl);
      row.max_ratio =
          std::max(row.max_ratio, run.regret.max_regret / run.regret.bound);
      if (!run.regret.violations.empty()) {
        ++row.violations;
        rep.theorem_violations.emplace_back(T, s);
      }
    }
    rep.theorem.push_back(row);
  }
  return rep;
}

}  // namespace retro
