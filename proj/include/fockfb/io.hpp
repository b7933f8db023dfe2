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

// Config parsing and result serialization: JSON for configs and aggregates,
// CSV for per-sample trajectory rows.

#pragma once

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include "fockfb/runner.hpp"
#include "json.hpp"

namespace fockfb {

using json = nlohmann::json;

namespace detail {

template <class T>
void read_field(const json& obj, const char* key, T& out, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(prefix + key, std::string("wrong type (") + e.what() + ")");
  }
}

inline void reject_unknown(const json& obj, const std::set<std::string>& known,
                           const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(prefix + it.key(), "unknown key");
}

}  // namespace detail

inline PhysicsParams params_from_json(const json& j, PhysicsParams p, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix.substr(0, prefix.size() - 1), "must be an object");
  detail::reject_unknown(j,
                         {"t_cavity", "n_thermal", "t_sample", "omega0", "phi0", "eta_d",
                          "m_sensor", "m_control", "n_sensors", "n_controls", "b_s", "c_s", "n_max",
                          "delay_depth", "te_coeff", "tg_coeff", "fold_occupancy_tail",
                          "decision_horizon", "detuning_hz", "atom_velocity"},
                         prefix);
  detail::read_field(j, "t_cavity", p.t_cavity, prefix);
  detail::read_field(j, "n_thermal", p.n_thermal, prefix);
  detail::read_field(j, "t_sample", p.t_sample, prefix);
  detail::read_field(j, "omega0", p.omega0, prefix);
  detail::read_field(j, "phi0", p.phi0, prefix);
  detail::read_field(j, "eta_d", p.eta_d, prefix);
  detail::read_field(j, "m_sensor", p.m_sensor, prefix);
  detail::read_field(j, "m_control", p.m_control, prefix);
  detail::read_field(j, "n_sensors", p.n_sensors, prefix);
  detail::read_field(j, "n_controls", p.n_controls, prefix);
  detail::read_field(j, "b_s", p.b_s, prefix);
  detail::read_field(j, "c_s", p.c_s, prefix);
  detail::read_field(j, "n_max", p.n_max, prefix);
  detail::read_field(j, "delay_depth", p.delay_depth, prefix);
  detail::read_field(j, "te_coeff", p.te_coeff, prefix);
  detail::read_field(j, "tg_coeff", p.tg_coeff, prefix);
  detail::read_field(j, "fold_occupancy_tail", p.fold_occupancy_tail, prefix);
  detail::read_field(j, "decision_horizon", p.decision_horizon, prefix);
  detail::read_field(j, "detuning_hz", p.detuning_hz, prefix);
  detail::read_field(j, "atom_velocity", p.atom_velocity, prefix);
  return p;
}

inline json to_json(const PhysicsParams& p) {
  return {{"t_cavity", p.t_cavity},       {"n_thermal", p.n_thermal},
          {"t_sample", p.t_sample},       {"omega0", p.omega0},
          {"phi0", p.phi0},               {"eta_d", p.eta_d},
          {"m_sensor", p.m_sensor},       {"m_control", p.m_control},
          {"n_sensors", p.n_sensors},     {"n_controls", p.n_controls},
          {"b_s", p.b_s},                 {"c_s", p.c_s},
          {"n_max", p.n_max},             {"delay_depth", p.delay_depth},
          {"te_coeff", p.te_coeff},       {"tg_coeff", p.tg_coeff},
          {"fold_occupancy_tail", p.fold_occupancy_tail},
          {"decision_horizon", p.decision_horizon},
          {"detuning_hz", p.detuning_hz}, {"atom_velocity", p.atom_velocity}};
}

inline CalibrationConfig calibration_from_json(const json& j, const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix.substr(0, prefix.size() - 1), "must be an object");
  detail::reject_unknown(j, {"file", "c0", "n_decay"}, prefix);
  CalibrationConfig c;
  detail::read_field(j, "file", c.file, prefix);
  detail::read_field(j, "c0", c.c0, prefix);
  detail::read_field(j, "n_decay", c.n_decay, prefix);
  return c;
}

inline json to_json(const CalibrationConfig& c) {
  return {{"file", c.file}, {"c0", c.c0}, {"n_decay", c.n_decay}};
}

/// Reads an ExperimentConfig; keys mirror the struct fields. A scalar
/// `target` is shorthand for a one-element `targets` list.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig c = {}) {
  if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
  detail::reject_unknown(j,
                         {"kind", "params", "plant_params", "calibration", "plant_calibration",
                          "target", "targets", "duration_ms", "stop_on_threshold", "threshold",
                          "trajectories", "seed", "out", "workers", "write_trajectories",
                          "qnd_burst", "sweep"},
                         "");
  if (auto it = j.find("kind"); it != j.end()) {
    if (!it->is_string()) throw ConfigError("kind", "must be a string");
    auto k = parse_kind(it->get<std::string>());
    if (!k) throw ConfigError("kind", "unknown experiment kind '" + it->get<std::string>() + "'");
    c.kind = *k;
  }
  if (auto it = j.find("params"); it != j.end()) c.params = params_from_json(*it, c.params, "params.");
  if (auto it = j.find("plant_params"); it != j.end())
    c.plant_params = params_from_json(*it, c.params, "plant_params.");
  if (auto it = j.find("calibration"); it != j.end())
    c.calibration = calibration_from_json(*it, "calibration.");
  if (auto it = j.find("plant_calibration"); it != j.end())
    c.plant_calibration = calibration_from_json(*it, "plant_calibration.");
  if (j.contains("target")) {
    int t = 0;
    detail::read_field(j, "target", t, "");
    c.targets = {t};
  }
  detail::read_field(j, "targets", c.targets, "");
  detail::read_field(j, "duration_ms", c.duration_ms, "");
  detail::read_field(j, "stop_on_threshold", c.stop_on_threshold, "");
  detail::read_field(j, "threshold", c.threshold, "");
  detail::read_field(j, "trajectories", c.trajectories, "");
  detail::read_field(j, "seed", c.seed, "");
  detail::read_field(j, "out", c.out_dir, "");
  detail::read_field(j, "workers", c.workers, "");
  detail::read_field(j, "write_trajectories", c.write_trajectories, "");
  detail::read_field(j, "qnd_burst", c.qnd_burst, "");
  if (auto it = j.find("sweep"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("sweep", "must be an object");
    detail::reject_unknown(*it, {"te_scale", "tg_scale", "n_sensors", "n_controls"}, "sweep.");
    detail::read_field(*it, "te_scale", c.sweep.te_scale, "sweep.");
    detail::read_field(*it, "tg_scale", c.sweep.tg_scale, "sweep.");
    detail::read_field(*it, "n_sensors", c.sweep.n_sensors, "sweep.");
    detail::read_field(*it, "n_controls", c.sweep.n_controls, "sweep.");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  // Relative calibration tables are looked up next to the config file.
  const auto base = std::filesystem::path(path).parent_path();
  for (CalibrationConfig* cal : {&c.calibration, c.plant_calibration ? &*c.plant_calibration : nullptr})
    if (cal && !cal->file.empty() && std::filesystem::path(cal->file).is_relative())
      cal->file = (base / cal->file).string();
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json j = {{"kind", to_string(c.kind)},
            {"params", to_json(c.params)},
            {"calibration", to_json(c.calibration)},
            {"targets", c.targets},
            {"duration_ms", c.duration_ms},
            {"stop_on_threshold", c.stop_on_threshold},
            {"threshold", c.threshold},
            {"trajectories", c.trajectories},
            {"seed", c.seed},
            {"out", c.out_dir},
            {"workers", c.workers},
            {"write_trajectories", c.write_trajectories},
            {"qnd_burst", c.qnd_burst},
            {"sweep",
             {{"te_scale", c.sweep.te_scale},
              {"tg_scale", c.sweep.tg_scale},
              {"n_sensors", c.sweep.n_sensors},
              {"n_controls", c.sweep.n_controls}}}};
  if (c.plant_params) j["plant_params"] = to_json(*c.plant_params);
  if (c.plant_calibration) j["plant_calibration"] = to_json(*c.plant_calibration);
  return j;
}

inline std::string csv_header(int n_max) {
  std::string h = "t_ms,role,revoked,occupancy,true_outcomes,detected,n_true,n_mean_est,distance,target";
  for (int n = 0; n <= n_max; ++n) h += fmt::format(",p{}", n);
  return h;
}

/// Per-sample rows. Outcomes are strings of 'e'/'g'; `detected` is '?' for
/// samples still in flight when the run ended.
inline void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log, int n_max) {
  out << csv_header(n_max) << '\n';
  fmt::memory_buffer buf;
  for (const auto& r : log.rows) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{:.3f},{},{},{},{},{},{},{:.6f},{:.6f},{}", r.t_ms,
                   to_string(r.role), r.revoked ? 1 : 0, r.occupancy, r.true_outcomes.str(),
                   r.detected ? r.detected->str() : std::string("?"), r.n_true, r.n_mean_est,
                   r.distance, r.target);
    for (double v : r.p) fmt::format_to(std::back_inserter(buf), ",{:.6g}", v);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

inline std::string trajectory_csv(const TrajectoryLog& log, int n_max) {
  std::ostringstream os;
  write_trajectory_csv(os, log, n_max);
  return os.str();
}

inline void write_decisions_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "t_ms,position,mode,n_mean_est,expected_distance\n";
  for (const auto& c : log.choices)
    out << fmt::format("{:.3f},{},{},{:.6f},{:.6f}\n", c.t_ms, c.position, to_string(c.mode),
                       c.n_mean_est, c.expected_distance);
}

inline json to_json(const Diagnostics& d) {
  return {{"inconsistencies", d.inconsistencies},
          {"reflections", d.reflections},
          {"reflected_mass", d.reflected_mass}};
}

inline json to_json(const TrajectorySummary& s) {
  json switches = json::array();
  for (const auto& w : s.switches) switches.push_back({{"t_ms", w.time}, {"from", w.from}, {"to", w.to}});
  json burst = json::array();
  for (const auto& b : s.burst) burst.push_back({{"phase", b.phase}, {"detected", b.detected.str()}});
  return {{"rows", s.rows},
          {"convergence_ms", s.convergence_ms ? json(*s.convergence_ms) : json(nullptr)},
          {"n_true_at_threshold", s.n_true_at_threshold ? json(*s.n_true_at_threshold) : json(nullptr)},
          {"final_n_true", s.final_n_true},
          {"final_p", s.final_p},
          {"switches", switches},
          {"late_mean_distance", s.late_mean_distance},
          {"late_mean_sq_error", s.late_mean_sq_error},
          {"revocations", s.revocations},
          {"plant_reflections", s.plant_reflections},
          {"diagnostics", to_json(s.diag)},
          {"qnd_burst", burst}};
}

inline json to_json(const DecisionFractions& f) {
  json e = json::array(), s = json::array(), a = json::array(), n = json::array();
  for (std::size_t b = 0; b < f.bin_centers.size(); ++b) {
    e.push_back(f.fraction(f.emitter, b));
    s.push_back(f.fraction(f.sensor, b));
    a.push_back(f.fraction(f.absorber, b));
    n.push_back(f.count(b));
  }
  return {{"bin_centers", f.bin_centers}, {"emitter", e}, {"sensor", s}, {"absorber", a}, {"counts", n}};
}

inline json aggregate_json(const ExperimentConfig& cfg, const EnsembleResult& r) {
  return {{"config", to_json(cfg)},
          {"pbar_fixed_time", r.pbar_fixed_time},
          {"pbar_threshold", r.pbar_threshold},
          {"poisson_ref", r.poisson_ref},
          {"convergence_times_ms", r.convergence_times_ms},
          {"decision_fractions", to_json(r.fractions)},
          {"diagnostics",
           {{"trajectories", r.trajectories},
            {"converged", r.converged},
            {"target", r.target},
            {"mean_late_distance", r.mean_late_distance},
            {"mean_late_sq_error", r.mean_late_sq_error},
            {"revocations", r.revocations},
            {"plant_reflections", r.plant_reflections},
            {"estimator", to_json(r.diag)}}}};
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rank,te_scale,tg_scale,n_sensors,n_controls,mean_distance,mean_sq_error,"
         "mean_convergence_ms,converged_fraction\n";
  int rank = 1;
  for (const auto& r : rows)
    out << fmt::format("{},{:.4f},{:.4f},{},{},{:.6f},{:.6f},{:.3f},{:.4f}\n", rank++, r.te_scale,
                       r.tg_scale, r.n_sensors, r.n_controls, r.mean_distance, r.mean_sq_error,
                       r.mean_convergence_ms, r.converged_fraction);
}

}  // namespace fockfb
