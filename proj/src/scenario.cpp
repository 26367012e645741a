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

#include "retro/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace retro {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start)
      .count();
}

// Independent random streams per purpose.
enum Stream : std::uint64_t { kLaunch = 1, kBall = 2, kSensor = 3, kExec = 4 };

std::mt19937_64 stream_rng(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

Vector gaussian(int n, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = std * nd(rng);
  return v;
}

struct Executor {
  const SystemModel& model;
  std::mt19937_64 rng;

  Vector advance(const Vector& x, const Vector& u, int t) {
    if (model.noise_scale() > 0.0) {
      return step(model, x, u, t,
                  gaussian(model.state_dim(), model.noise_scale(), rng));
    }
    return step(model, x, u, t);
  }
};

void finish(const SystemModel& model, const PointSeries& truth,
            MethodReport* r) {
  r->final_error =
      (model.output(r->states.back()) - truth.back()).norm();
  r->total_cost = trajectory_cost(model, r->states, r->controls, truth);
}

MethodReport open_loop(const std::string& name, const SystemModel& model,
                       const Vector& x0, const std::vector<Vector>& controls,
                       const PointSeries& truth, std::uint64_t seed) {
  MethodReport r;
  r.method = name;
  Executor exec{model, stream_rng(seed, kExec)};
  r.states.push_back(x0);
  for (int t = 0; t < static_cast<int>(controls.size()); ++t) {
    r.states.push_back(exec.advance(r.states.back(), controls[t], t));
    r.controls.push_back(controls[t]);
  }
  finish(model, truth, &r);
  return r;
}

std::map<int, const Observation*> by_time(const std::vector<Observation>& obs) {
  std::map<int, const Observation*> out;
  for (const Observation& o : obs) out[o.t] = &o;
  return out;
}

}  // namespace

BallisticModel filter_model(const ScenarioConfig& cfg) {
  BallisticModel m;
  m.gravity = cfg.target.gravity;
  m.dt = cfg.model.options.dt;
  m.process_noise = cfg.belief.process_noise;
  return m;
}

BeliefTrajectory planning_prior(const ScenarioConfig& cfg) {
  const int d = static_cast<int>(cfg.target.gravity.size());
  Vector mean(2 * d);
  mean << cfg.target.launch_position, cfg.target.launch_velocity;
  Vector var(2 * d);
  var << Vector::Constant(d, cfg.target.position_std * cfg.target.position_std),
      Vector::Constant(d, cfg.target.velocity_std * cfg.target.velocity_std);
  return ballistic_prior(mean, var.asDiagonal().toDenseMatrix(),
                         filter_model(cfg), cfg.horizon);
}

std::shared_ptr<const Forecaster> make_forecaster(const ScenarioConfig& cfg) {
  if (cfg.forecaster.kind == "gmm") {
    return std::make_shared<GmmForecaster>(
        cfg.forecaster.components, filter_model(cfg), cfg.forecaster.gmm,
        cfg.forecaster.min_observations);
  }
  return std::make_shared<KalmanForecaster>();
}

Vector initial_state(const ScenarioConfig& cfg, const SystemModel& model) {
  if (cfg.model.x0.size() == 0) return Vector::Zero(model.state_dim());
  require_dim(cfg.model.x0, model.state_dim(), "initial state");
  return cfg.model.x0;
}

TargetRealization generate_target(const ScenarioConfig& cfg,
                                  std::uint64_t seed) {
  const TargetConfig& tc = cfg.target;
  const int d = static_cast<int>(tc.gravity.size());
  const int T = cfg.horizon;
  const double dt = cfg.model.options.dt;

  auto launch_rng = stream_rng(seed, kLaunch);
  TargetRealization out;
  out.launch_state.resize(2 * d);
  out.launch_state << tc.launch_position + gaussian(d, tc.position_std, launch_rng),
      tc.launch_velocity + gaussian(d, tc.velocity_std, launch_rng);

  auto ball_rng = stream_rng(seed, kBall);
  Vector p = out.launch_state.head(d);
  Vector v = out.launch_state.tail(d);
  out.truth.push_back(p);
  for (int t = 0; t < T; ++t) {
    const Vector a = tc.gravity + gaussian(d, tc.process_noise, ball_rng);
    p = p + dt * v + 0.5 * dt * dt * a;
    v = v + dt * a;
    out.truth.push_back(p);
  }

  const ObservationConfig& oc = cfg.observations;
  const int stop = oc.stop < 0 ? T - 1 : std::min(oc.stop, T - 1);
  auto sensor_rng = stream_rng(seed, kSensor);
  for (int t = oc.start; t <= stop; t += oc.every) {
    Observation o;
    o.t = t;
    o.noise = oc.noise;
    o.y = out.truth[t] + gaussian(d, oc.noise, sensor_rng);
    out.observations.push_back(std::move(o));
  }
  return out;
}

std::vector<Observation> load_replay(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error(path + ": cannot open replay file");
  std::vector<Observation> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::vector<double> values;
    bool numeric = true;
    for (const std::string& c : cells) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(c, &used));
        if (c.find_first_not_of(" \t", used) != std::string::npos) {
          numeric = false;
        }
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (lineno == 1 && out.empty()) continue;
      throw Error(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (static_cast<int>(values.size()) != dim + 2) {
      throw Error(path + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(dim + 2) + " columns, got " +
                  std::to_string(values.size()));
    }
    Observation o;
    o.t = static_cast<int>(values[0]);
    if (o.t != values[0] || o.t < 0) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": time must be a non-negative integer");
    }
    if (!out.empty() && o.t <= out.back().t) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": times must be strictly increasing");
    }
    o.y = Eigen::Map<const Vector>(values.data() + 1, dim);
    o.noise = values.back();
    if (!(o.noise > 0.0)) {
      throw Error(path + ":" + std::to_string(lineno) + ": noise must be > 0");
    }
    out.push_back(std::move(o));
  }
  return out;
}

const MethodReport* RunReport::find(const std::string& method) const {
  for (const MethodReport& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

RunReport run_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                       const EventSink& sink) {
  validate(cfg);
  RunReport report;
  report.seed = seed;
  report.config = cfg;
  report.config.seed = seed;

  const ModelPtr model = make_model(cfg.model.id, cfg.model.options);
  const Vector x0 = initial_state(cfg, *model);
  const int T = cfg.horizon;
  const BeliefTrajectory prior = planning_prior(cfg);
  const auto forecaster = make_forecaster(cfg);

  report.target = generate_target(cfg, seed);
  if (!cfg.observations.replay.empty()) {
    report.replayed = true;
    report.target.observations =
        load_replay(cfg.observations.replay, model->target_dim());
    for (const Observation& o : report.target.observations) {
      if (o.t >= T) {
        throw Error(cfg.observations.replay + ": observation time " +
                    std::to_string(o.t) + " beyond the horizon");
      }
    }
    // Without a recorded truth, score against the filter's estimate after
    // the whole stream.
    BeliefTrajectory b = prior;
    for (const Observation& o : report.target.observations) {
      b = observe_and_update(b, o);
    }
    report.target.truth = b.means();
  }
  const PointSeries& truth = report.target.truth;
  const auto observations = by_time(report.target.observations);

  auto t0 = Clock::now();
  report.plan = solve(*model, x0, prior.means(), cfg.solver);
  const double plan_us = elapsed_us(t0);
  t0 = Clock::now();
  report.oracle = oracle_solve(*model, x0, truth, cfg.solver);
  const double oracle_us = elapsed_us(t0);

  const KlOptions kl{cfg.belief.kl_samples, cfg.belief.kl_seed};

  for (const std::string& name : cfg.methods) {
    MethodReport r;
    try {
      if (name == "oracle") {
        r = open_loop(name, *model, x0, report.oracle.trajectory.controls,
                      truth, seed);
        r.plan_time_us = oracle_us;
        r.ddp_iterations = report.oracle.iterations;
      } else if (name == "no_adjust") {
        r = open_loop(name, *model, x0, report.plan.trajectory.controls, truth,
                      seed);
        r.plan_time_us = plan_us;
        r.ddp_iterations = report.plan.iterations;
        r.regret = regret_series(report.plan.value_trace, nullptr,
                                 report.oracle.value_trace);
      } else if (name == "retro") {
        RetroOptions ro;
        ro.threshold = cfg.adjust.threshold;
        ro.kl = kl;
        ro.gradient = cfg.adjust.gradient;
        ro.desirability = cfg.adjust.desirability;
        RetroSession session(model, report.plan, prior, forecaster, ro);
        Executor exec{*model, stream_rng(seed, kExec)};
        r.method = name;
        r.states.push_back(x0);
        for (int t = 0; t < T; ++t) {
          auto it = observations.find(t);
          std::optional<Observation> obs;
          if (it != observations.end()) obs = *it->second;
          auto res = session.step(t, obs);
          if (res.event) {
            r.adjust_time_us += res.event->wall_time_us;
            if (sink) sink(name, *res.event);
          }
          r.states.push_back(exec.advance(r.states.back(), res.control, t));
          r.controls.push_back(res.control);
        }
        finish(*model, truth, &r);
        r.events = session.events();
        r.plan_time_us = plan_us;
        r.belief_time_us = session.belief_time_us();
        r.ddp_iterations = report.plan.iterations;
        const auto& sol = session.last_solution();
        r.regret = regret_series(report.plan.value_trace,
                                 sol ? &*sol : nullptr,
                                 report.oracle.value_trace);
      } else if (name == "multirun_ddp") {
        r.method = name;
        ShiftTrigger trigger(prior, cfg.adjust.threshold, kl);
        BeliefTrajectory posterior = prior;
        std::vector<Vector> controls = report.plan.trajectory.controls;
        Executor exec{*model, stream_rng(seed, kExec)};
        r.states.push_back(x0);
        r.ddp_iterations = report.plan.iterations;
        for (int t = 0; t < T; ++t) {
          auto it = observations.find(t);
          if (it != observations.end()) {
            const auto start = Clock::now();
            posterior = forecaster->update(posterior, *it->second);
            const KlEstimate k = trigger.measure(posterior);
            r.belief_time_us += elapsed_us(start);
            if (trigger.exceeds(k)) {
              ShiftEvent ev;
              ev.t = t;
              ev.kl = k.value;
              ev.kl_std_error = k.std_error;
              ev.prior_means = trigger.reference().means();
              ev.posterior_means = posterior.means();
              const PointSeries means = posterior.means();
              const PointSeries targets(means.begin() + t, means.end());
              const auto event_start = Clock::now();
              try {
                const SolveReport rs =
                    solve(*model, r.states.back(), targets, cfg.solver);
                ev.wall_time_us = elapsed_us(event_start);
                double sq = 0.0;
                for (int s = t; s < T; ++s) {
                  sq += (rs.trajectory.controls[s - t] - controls[s])
                            .squaredNorm();
                  controls[s] = rs.trajectory.controls[s - t];
                }
                ev.du_norm = std::sqrt(sq);
                ev.ddp_iterations = rs.iterations;
                r.ddp_iterations += rs.iterations;
                trigger.rebase(posterior);
              } catch (const Error& e) {
                ev.wall_time_us = elapsed_us(event_start);
                ev.failed = true;
                ev.error = e.what();
              }
              r.adjust_time_us += ev.wall_time_us;
              if (sink) sink(name, ev);
              r.events.push_back(std::move(ev));
            }
          }
          r.states.push_back(exec.advance(r.states.back(), controls[t], t));
          r.controls.push_back(controls[t]);
        }
        finish(*model, truth, &r);
        r.plan_time_us = plan_us;
      }
    } catch (const Error& e) {
      r = MethodReport();
      r.method = name;
      r.ok = false;
      r.error = e.what();
      r.final_error = std::numeric_limits<double>::quiet_NaN();
      r.total_cost = std::numeric_limits<double>::quiet_NaN();
    }
    r.total_time_us = r.plan_time_us + r.belief_time_us + r.adjust_time_us;
    report.methods.push_back(std::move(r));
  }
  return report;
}

}  // namespace retro
