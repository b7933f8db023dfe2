// Copyright 2026 The fockfb Authors
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

// fockfb: command-line front end of the Fock-state feedback simulator.
//
//   fockfb trajectory --target 4 --out run/
//   fockfb ensemble   --target 2 --trajectories 200 --workers 4 --out run/
//   fockfb fractions  --target 4 --trajectories 200 --out run/
//   fockfb sequence   --targets 3,1,4,2,6,2,5 --duration-ms 400 --out run/
//   fockfb sweep      --config sweep.json --out run/
//
// Exit status: 0 on success, 2 on configuration errors, 1 otherwise.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fockfb/fockfb.hpp"

namespace fs = std::filesystem;
using namespace fockfb;

namespace {

struct Overrides {
  std::string config;
  std::optional<int> target;
  std::vector<int> targets;
  std::optional<int> trajectories;
  std::optional<double> duration_ms;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<int> delay_depth;
  std::optional<std::string> out;
  std::optional<int> workers;
  bool stop_on_threshold = false;
  bool write_trajectories = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON experiment config");
  sub->add_option("--target", o.target, "Fixed target photon number");
  sub->add_option("--targets", o.targets, "Comma-separated target sequence")->delimiter(',');
  sub->add_option("--trajectories", o.trajectories, "Number of trajectories");
  sub->add_option("--duration-ms", o.duration_ms, "Run duration in ms");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--threshold", o.threshold, "Estimated p(n_t) threshold");
  sub->add_option("--delay-depth", o.delay_depth, "Samples in flight between cavity and detector");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--workers", o.workers, "Worker threads");
  sub->add_flag("--stop-on-threshold", o.stop_on_threshold, "Stop each trajectory at the threshold");
  sub->add_flag("--write-trajectories", o.write_trajectories, "Ensemble: also write per-trajectory CSVs");
}

ExperimentConfig build_config(ExperimentKind kind, const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  c.kind = kind;
  if (kind == ExperimentKind::sequence && o.config.empty()) c.targets = {3, 1, 4, 2, 6, 2, 5};
  if (o.target) c.targets = {*o.target};
  if (!o.targets.empty()) c.targets = o.targets;
  if (o.trajectories) c.trajectories = *o.trajectories;
  if (o.duration_ms) c.duration_ms = *o.duration_ms;
  if (o.seed) c.seed = *o.seed;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.delay_depth) {
    c.params.delay_depth = *o.delay_depth;
    if (c.plant_params) c.plant_params->delay_depth = *o.delay_depth;
  }
  if (o.out) c.out_dir = *o.out;
  if (o.workers) c.workers = *o.workers;
  if (o.stop_on_threshold) c.stop_on_threshold = true;
  if (o.write_trajectories) c.write_trajectories = true;
  return c;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run(const ExperimentConfig& cfg) {
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  const int n_max = cfg.params.n_max;

  switch (cfg.kind) {
    case ExperimentKind::trajectory:
    case ExperimentKind::sequence: {
      const TrajectoryLog log = run_trajectory(cfg, 0);
      const std::string stem = cfg.kind == ExperimentKind::sequence ? "sequence" : "trajectory";
      write_file(out / (stem + ".csv"), trajectory_csv(log, n_max));
      std::ofstream dec(out / "decisions.csv");
      write_decisions_csv(dec, log);
      json summary = {{"config", to_json(cfg)}, {"summary", to_json(log.summary)}};
      write_file(out / "summary.json", summary.dump(2) + "\n");
      std::cout << stem << ": " << log.rows.size() << " rows, final n_true "
                << log.summary.final_n_true << ", " << log.summary.switches.size()
                << " target switches -> " << out.string() << "\n";
      return 0;
    }
    case ExperimentKind::ensemble:
    case ExperimentKind::fractions: {
      const EnsembleResult r = run_ensemble(cfg);
      const std::string stem = cfg.kind == ExperimentKind::fractions ? "fractions" : "ensemble";
      write_file(out / (stem + ".json"), aggregate_json(cfg, r).dump(2) + "\n");
      if (cfg.write_trajectories) {
        fs::create_directories(out / "trajectories");
        for (std::size_t i = 0; i < r.logs.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "traj_%05zu.csv", i);
          write_file(out / "trajectories" / name, trajectory_csv(r.logs[i], n_max));
        }
      }
      std::cout << stem << ": " << r.trajectories << " trajectories, " << r.converged
                << " reached threshold, pbar_fixed_time(n_t) " << r.pbar_fixed_time[r.target]
                << " -> " << out.string() << "\n";
      return 0;
    }
    case ExperimentKind::sweep: {
      const auto rows = run_sweep(cfg);
      std::ofstream csv(out / "sweep.csv");
      write_sweep_csv(csv, rows);
      std::cout << "sweep: " << rows.size() << " grid points -> " << (out / "sweep.csv").string() << "\n";
      return 0;
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fock-state quantum feedback simulator"};
  app.require_subcommand(1);
  Overrides o;
  std::vector<std::pair<CLI::App*, ExperimentKind>> subs;
  for (auto [name, kind, help] :
       {std::tuple{"trajectory", ExperimentKind::trajectory, "Single closed-loop trajectory"},
        std::tuple{"ensemble", ExperimentKind::ensemble, "Ensemble statistics"},
        std::tuple{"sequence", ExperimentKind::sequence, "Programmed target sequence"},
        std::tuple{"fractions", ExperimentKind::fractions, "Controller choice fractions"},
        std::tuple{"sweep", ExperimentKind::sweep, "Grid over t_e, t_g, N_s, N_c"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    subs.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ExperimentKind kind = ExperimentKind::trajectory;
  for (auto [sub, k] : subs)
    if (sub->parsed()) kind = k;

  ExperimentConfig cfg;
  try {
    cfg = build_config(kind, o);
    for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    return run(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
