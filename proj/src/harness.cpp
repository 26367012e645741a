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

#include "retro/harness.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "retro/config.hpp"
#include "retro/report.hpp"
#include "retro/scenario.hpp"

namespace retro {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::string replay;
};

void add_common(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--config", f->config, "Scenario config (JSON)");
  cmd->add_option("--seed", f->seed, "Random seed (overrides the config)");
  cmd->add_option("--out", f->out, "Output directory");
  cmd->add_option("--format", f->format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
}

ScenarioConfig load(const CommonFlags& f) {
  ScenarioConfig cfg = f.config.empty() ? ScenarioConfig() : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.format.empty()) cfg.output.format = f.format;
  if (!f.replay.empty()) cfg.observations.replay = f.replay;
  validate(cfg);
  return cfg;
}

std::string output_dir(const CommonFlags& f, const ScenarioConfig& cfg) {
  std::string dir = f.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("RETRO_OUT_DIR"); env && *env) dir = env;
  }
  if (dir.empty()) dir = cfg.output.dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(dir + ": cannot create output directory: " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_run(const CommonFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = load(f);
  const std::string dir = output_dir(f, cfg);
  const std::string tag = "run_" + std::to_string(cfg.seed);
  EventSink sink;
  if (cfg.output.event_log) {
    const std::string log = join(dir, tag + "_events.jsonl");
    write_text(log, "");
    sink = [log, seed = cfg.seed](const std::string& method,
                                  const ShiftEvent& e) {
      append_line(log, event_log_line(method, seed, e));
    };
  }
  const RunReport report = run_scenario(cfg, cfg.seed, sink);
  std::string path;
  if (cfg.output.format == "csv") {
    path = join(dir, tag + ".csv");
    write_text(path, to_csv(csv_rows(report)));
  } else {
    path = join(dir, tag + ".json");
    write_text(path, to_json(report).dump(2) + "\n");
  }
  bool all_ok = true;
  for (const MethodReport& m : report.methods) {
    out << m.method << ": final_error=" << format_number(m.final_error)
        << " total_cost=" << format_number(m.total_cost)
        << " events=" << m.events.size()
        << " total_time_us=" << format_number(m.total_time_us);
    if (!m.ok) {
      out << " FAILED: " << m.error;
      all_ok = false;
    }
    out << "\n";
  }
  out << "report: " << path << "\n";
  return all_ok ? kExitOk : kExitRuntime;
}

int cmd_benchmark(const CommonFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = load(f);
  const std::string dir = output_dir(f, cfg);
  const auto records = complexity_benchmark(cfg, cfg.seed);
  const std::string csv = to_csv(csv_rows(records));
  write_text(join(dir, "benchmark.csv"), csv);
  write_text(join(dir, "benchmark.json"), to_json(records).dump(2) + "\n");
  out << csv;
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = load(f);
  const std::string dir = output_dir(f, cfg);
  const auto rows = horizon_sweep(cfg.sweep, cfg.seed, cfg.solver);
  const std::string csv = to_csv(csv_rows(rows));
  write_text(join(dir, "sweep.csv"), csv);
  if (cfg.output.format == "json") {
    write_text(join(dir, "sweep.json"), to_json(rows).dump(2) + "\n");
  }
  out << csv;
  return kExitOk;
}

int cmd_bounds(const CommonFlags& f, std::ostream& out) {
  const ScenarioConfig cfg = load(f);
  const std::string dir = output_dir(f, cfg);
  const BoundsReport rep = check_bounds(cfg.bounds, cfg.seed, cfg.solver);
  write_text(join(dir, "bounds.json"), to_json(rep).dump(2) + "\n");
  out << "lemma: instances=" << rep.lemma_instances
      << " violations=" << rep.lemma_violations.size()
      << " min_margin=" << format_number(rep.lemma_min_margin) << "\n";
  out << "lemma_violations:";
  for (int i : rep.lemma_violations) out << " " << i;
  out << "\n";
  for (const TheoremRow& t : rep.theorem) {
    out << "theorem: T=" << t.T << " seeds=" << t.seeds
        << " violations=" << t.violations
        << " max_ratio=" << format_number(t.max_ratio)
        << " max_step_kl=" << format_number(t.max_step_kl) << "\n";
  }
  out << "theorem_violations:";
  for (const auto& [T, s] : rep.theorem_violations) {
    out << " " << T << ":" << s;
  }
  out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Belief-shift fine-tuning of trajectory plans", "retro"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto* run = app.add_subcommand("run", "Run the interception scenario");
  add_common(run, &flags);
  run->add_option("--replay", flags.replay, "Observation replay CSV");
  auto* bench = app.add_subcommand("benchmark", "Timing against state dimension");
  add_common(bench, &flags);
  auto* sweep = app.add_subcommand("sweep-horizon", "Cost and regret against T");
  add_common(sweep, &flags);
  auto* bounds = app.add_subcommand("check-bounds", "Property sweep of the bounds");
  add_common(bounds, &flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  try {
    if (*run) return cmd_run(flags, out);
    if (*bench) return cmd_benchmark(flags, out);
    if (*sweep) return cmd_sweep(flags, out);
    if (*bounds) return cmd_bounds(flags, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace retro
