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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fockfb/controller.hpp"
#include "fockfb/distribution.hpp"
#include "fockfb/estimator.hpp"
#include "fockfb/physics.hpp"
#include "fockfb/plant.hpp"

namespace fockfb {

enum class ExperimentKind { trajectory, ensemble, fractions, sequence, sweep };

inline constexpr std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::trajectory: return "trajectory";
    case ExperimentKind::ensemble: return "ensemble";
    case ExperimentKind::fractions: return "fractions";
    case ExperimentKind::sequence: return "sequence";
    case ExperimentKind::sweep: return "sweep";
  }
  return "trajectory";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
  for (auto k : {ExperimentKind::trajectory, ExperimentKind::ensemble, ExperimentKind::fractions,
                 ExperimentKind::sequence, ExperimentKind::sweep})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Parameter grid for `sweep`. Interaction times are scaled relative to the
/// configured te_coeff / tg_coeff.
struct SweepGrid {
  std::vector<double> te_scale{1.0};
  std::vector<double> tg_scale{1.0};
  std::vector<int> n_sensors{12};
  std::vector<int> n_controls{4};
};

struct CalibrationConfig {
  std::string file;  // empty: parametric model below
  double c0 = 0.9;
  double n_decay = 20.0;

  ActuatorCalibration build(int n_max) const {
    if (!file.empty()) return ActuatorCalibration::load(file, n_max);
    return ActuatorCalibration::parametric(n_max, c0, n_decay);
  }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::trajectory;
  PhysicsParams params;
  std::optional<PhysicsParams> plant_params;  // model mismatch; defaults to `params`
  CalibrationConfig calibration;
  std::optional<CalibrationConfig> plant_calibration;
  std::vector<int> targets{4};
  double duration_ms = 140.0;
  bool stop_on_threshold = false;
  double threshold = 0.8;
  int trajectories = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int workers = 1;
  bool write_trajectories = false;
  int qnd_burst = 0;  // sensor samples sent after the loop ends, raw detections recorded
  SweepGrid sweep;

  const PhysicsParams& plant() const { return plant_params ? *plant_params : params; }

  std::vector<std::string> validate() const {
    auto warnings = params.validate();
    if (plant_params) {
      plant_params->validate();
      if (plant_params->n_max != params.n_max || plant_params->delay_depth != params.delay_depth)
        throw ConfigError("plant_params", "n_max and delay_depth must match the controller");
    }
    if (!(duration_ms >= 0.0) || !std::isfinite(duration_ms))
      throw ConfigError("duration_ms", "must be non-negative");
    if (trajectories < 1) throw ConfigError("trajectories", "must be at least 1");
    if (workers < 1) throw ConfigError("workers", "must be at least 1");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold", "must lie in (0,1)");
    if (targets.empty()) throw ConfigError("targets", "must not be empty");
    for (int t : targets) TargetSpec::make(t, params);
    if (qnd_burst < 0) throw ConfigError("qnd_burst", "must be non-negative");
    if (kind == ExperimentKind::sweep) {
      if (sweep.te_scale.empty()) throw ConfigError("sweep.te_scale", "grid axis is empty");
      if (sweep.tg_scale.empty()) throw ConfigError("sweep.tg_scale", "grid axis is empty");
      if (sweep.n_sensors.empty()) throw ConfigError("sweep.n_sensors", "grid axis is empty");
      if (sweep.n_controls.empty()) throw ConfigError("sweep.n_controls", "grid axis is empty");
      for (double s : sweep.te_scale)
        if (!(s > 0.0)) throw ConfigError("sweep.te_scale", "scales must be positive");
      for (double s : sweep.tg_scale)
        if (!(s > 0.0)) throw ConfigError("sweep.tg_scale", "scales must be positive");
      for (int n : sweep.n_sensors)
        if (n < 1) throw ConfigError("sweep.n_sensors", "must be at least 1");
      for (int n : sweep.n_controls)
        if (n < 0) throw ConfigError("sweep.n_controls", "must be non-negative");
    }
    calibration.build(params.n_max);
    if (plant_calibration) plant_calibration->build(params.n_max);
    return warnings;
  }
};

inline long interval_count(double duration_ms, double t_sample) {
  return static_cast<long>(std::floor(duration_ms * 1e-3 / t_sample + 1e-9));
}

struct LogRow {
  double t_ms = 0.0;
  Role role = Role::off;
  bool revoked = false;
  int occupancy = 0;
  Outcomes true_outcomes;
  std::optional<Outcomes> detected;  // unset while still in flight at the end
  int n_true = 0;
  double n_mean_est = 0.0;
  double distance = 0.0;
  int target = 0;
  std::vector<double> p;
};

/// Mode chosen for a control slot, with the estimate the choice was based on.
struct ControlChoice {
  double t_ms = 0.0;
  int position = 0;
  Role mode = Role::sensor;
  double n_mean_est = 0.0;
  double expected_distance = 0.0;
};

struct BurstDetection {
  double phase = 0.0;
  Outcomes detected;
};

struct TrajectorySummary {
  long rows = 0;
  std::optional<double> convergence_ms;  // first estimated p(n_t) > threshold, first target
  std::optional<int> n_true_at_threshold;
  int final_n_true = 0;
  std::vector<double> final_p;
  std::vector<TargetSwitch> switches;  // times in ms
  double late_mean_distance = 0.0;     // estimator d averaged over the second half
  double late_mean_sq_error = 0.0;     // (n_true - n_t)^2 averaged over the second half
  long revocations = 0;
  Diagnostics diag;
  long plant_reflections = 0;
  std::vector<BurstDetection> burst;
};

struct TrajectoryLog {
  std::vector<LogRow> rows;
  std::vector<ControlChoice> choices;
  TrajectorySummary summary;
};

struct RunOptions {
  bool keep_rows = true;
};

/// One closed-loop realization.
inline TrajectoryLog run_trajectory(const ExperimentConfig& cfg, std::uint64_t index,
                                    RunOptions opts = {}) {
  const PhysicsParams& kp = cfg.params;
  const double dt = kp.t_sample;
  const long n_rows = interval_count(cfg.duration_ms, dt);

  Controller ctrl(kp, cfg.calibration.build(kp.n_max), cfg.targets.front());
  Plant plant(cfg.plant(), (cfg.plant_calibration ? *cfg.plant_calibration : cfg.calibration).build(kp.n_max),
              RngSpec{cfg.seed, index}.make());
  TargetSequencer sequencer(cfg.targets, cfg.threshold);

  TrajectoryLog log;
  if (opts.keep_rows) log.rows.reserve(static_cast<std::size_t>(n_rows));
  auto& sum = log.summary;
  double last_mean = 0.0, last_expected = 0.0;
  long late_count = 0;
  const long late_start = n_rows / 2;

  for (long i = 0; i < n_rows; ++i) {
    const double t_ms = static_cast<double>(i) * dt * 1e3;
    auto [crossing, fresh] = ctrl.advance();
    const int fresh_pos = (ctrl.state().position + loop_length(kp) - 1) % loop_length(kp);
    if (fresh_pos >= kp.n_sensors)
      log.choices.push_back({t_ms, fresh_pos, fresh.role, last_mean, last_expected});
    auto [truth, detection] = plant.cross(crossing);
    plant.evolve(dt);
    if (detection) ctrl.on_detection(detection->detected);

    const PhotonDistribution now = ctrl.estimate();
    const int n_t = ctrl.target().n_target;
    if (!sum.convergence_ms && sequencer.index() == 0 && stop_rule(now, n_t, cfg.threshold)) {
      sum.convergence_ms = t_ms + dt * 1e3;
      sum.n_true_at_threshold = plant.n_true();
    }
    const bool done = cfg.stop_on_threshold && sequencer.exhausted() && stop_rule(now, n_t, cfg.threshold);
    if (auto sw = sequencer.step(now, t_ms + dt * 1e3)) ctrl.set_target(sw->to);

    const DecisionSet decision = ctrl.decide(now);
    last_mean = now.mean();
    last_expected = decision.expected_distance;
    if (crossing.interacts() == false && is_actuator(crossing.role)) ++sum.revocations;

    const double d = distance(now, n_t);
    if (i >= late_start) {
      sum.late_mean_distance += d;
      sum.late_mean_sq_error += double(plant.n_true() - n_t) * double(plant.n_true() - n_t);
      ++late_count;
    }
    if (opts.keep_rows) {
      LogRow row;
      row.t_ms = t_ms;
      row.role = crossing.role;
      row.revoked = is_actuator(crossing.role) && !crossing.resonant;
      row.occupancy = truth.occupancy;
      row.true_outcomes = truth.atoms;
      row.n_true = plant.n_true();
      row.n_mean_est = now.mean();
      row.distance = d;
      row.target = n_t;
      row.p.assign(now.values().begin(), now.values().end());
      log.rows.push_back(std::move(row));
      if (detection) log.rows[static_cast<std::size_t>(detection->sample.id)].detected = detection->detected;
    }
    ++sum.rows;
    sum.final_p.assign(now.values().begin(), now.values().end());
    if (done) break;
  }

  if (late_count > 0) {
    sum.late_mean_distance /= static_cast<double>(late_count);
    sum.late_mean_sq_error /= static_cast<double>(late_count);
  }
  sum.final_n_true = plant.n_true();
  if (sum.final_p.empty()) {
    const auto v = ctrl.estimate().values();
    sum.final_p.assign(v.begin(), v.end());
  }
  sum.switches = sequencer.switches();
  sum.diag = ctrl.state().diag;
  sum.plant_reflections = plant.reflections();

  // Optional QND read-out burst after the loop: sensors only, with Ramsey
  // phases stepping through eight settings.
  for (int b = 0; b < cfg.qnd_burst; ++b) {
    SampleAnnouncement s;
    s.role = Role::sensor;
    s.phase = wrap_phase(b * pi / 4.0);
    PlantSample truth;
    truth.ann = s;
    Rng burst_rng = RngSpec{cfg.seed ^ 0xb0b5ULL, index * 1000003ULL + b}.make();
    truth.occupancy = sample_occupancy(cfg.plant().m_sensor, burst_rng, cfg.plant().fold_occupancy_tail);
    for (int a = 0; a < truth.occupancy; ++a)
      truth.atoms.push_back(interact_sensor_true(plant.n_true(), s.phase, cfg.plant(), burst_rng));
    sum.burst.push_back({s.phase, detect(truth.atoms, cfg.plant().eta_d, burst_rng)});
  }
  return log;
}

/// Runs `count` independent jobs on up to `workers` threads; results are
/// stored by index so the outcome does not depend on scheduling.
template <class Result, class Job>
std::vector<Result> run_indexed(int count, int workers, Job&& job) {
  std::vector<Result> results(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) results[static_cast<std::size_t>(i)] = job(i);
  };
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  return results;
}

struct DecisionFractions {
  double bin_width = 0.1;
  std::vector<double> bin_centers;
  std::vector<long> emitter, sensor, absorber;

  explicit DecisionFractions(int n_max = 12, double width = 0.1) : bin_width(width) {
    const int bins = static_cast<int>(std::lround(n_max / width)) + 1;
    for (int b = 0; b < bins; ++b) bin_centers.push_back(b * width);
    emitter.assign(bins, 0);
    sensor.assign(bins, 0);
    absorber.assign(bins, 0);
  }

  int bin_of(double n_mean) const {
    const long b = std::lround(n_mean / bin_width);
    return static_cast<int>(std::clamp<long>(b, 0, static_cast<long>(bin_centers.size()) - 1));
  }

  void add(const ControlChoice& c) {
    const int b = bin_of(c.n_mean_est);
    if (c.mode == Role::emitter) ++emitter[b];
    else if (c.mode == Role::absorber) ++absorber[b];
    else ++sensor[b];
  }

  void merge(const DecisionFractions& o) {
    for (std::size_t b = 0; b < bin_centers.size(); ++b) {
      emitter[b] += o.emitter[b];
      sensor[b] += o.sensor[b];
      absorber[b] += o.absorber[b];
    }
  }

  long count(std::size_t b) const { return emitter[b] + sensor[b] + absorber[b]; }
  double fraction(const std::vector<long>& v, std::size_t b) const {
    const long c = count(b);
    return c > 0 ? static_cast<double>(v[b]) / static_cast<double>(c) : 0.0;
  }
};

inline std::vector<double> poisson_reference(double mean, int n_max) {
  std::vector<double> p;
  double term = std::exp(-mean);
  for (int n = 0; n <= n_max; ++n) {
    p.push_back(term);
    term *= mean / (n + 1);
  }
  return p;
}

struct EnsembleResult {
  int trajectories = 0;
  int target = 0;
  std::vector<double> pbar_fixed_time;
  std::vector<double> pbar_threshold;
  std::vector<double> poisson_ref;
  std::vector<double> convergence_times_ms;  // trajectory order, converged ones only
  int converged = 0;
  DecisionFractions fractions;
  double mean_late_distance = 0.0;
  double mean_late_sq_error = 0.0;
  Diagnostics diag;
  long plant_reflections = 0;
  long revocations = 0;
  std::vector<TrajectoryLog> logs;  // kept only when trajectories are written out
};

struct TrajectoryDigest {
  TrajectorySummary summary;
  DecisionFractions fractions;
  TrajectoryLog log;
};

inline EnsembleResult run_ensemble(const ExperimentConfig& cfg) {
  const int dim = cfg.params.dim();
  auto digests = run_indexed<TrajectoryDigest>(cfg.trajectories, cfg.workers, [&](int i) {
    TrajectoryDigest d;
    d.log = run_trajectory(cfg, static_cast<std::uint64_t>(i), {cfg.write_trajectories});
    d.fractions = DecisionFractions(cfg.params.n_max);
    for (const auto& c : d.log.choices) d.fractions.add(c);
    d.log.choices.clear();
    d.summary = d.log.summary;
    return d;
  });

  EnsembleResult r;
  r.trajectories = cfg.trajectories;
  r.target = cfg.targets.front();
  r.pbar_fixed_time.assign(dim, 0.0);
  r.pbar_threshold.assign(dim, 0.0);
  r.poisson_ref = poisson_reference(r.target, cfg.params.n_max);
  r.fractions = DecisionFractions(cfg.params.n_max);
  for (auto& d : digests) {
    const auto& s = d.summary;
    r.pbar_fixed_time[s.final_n_true] += 1.0;
    if (s.convergence_ms) {
      r.convergence_times_ms.push_back(*s.convergence_ms);
      r.pbar_threshold[*s.n_true_at_threshold] += 1.0;
      ++r.converged;
    }
    r.fractions.merge(d.fractions);
    r.mean_late_distance += s.late_mean_distance;
    r.mean_late_sq_error += s.late_mean_sq_error;
    r.diag.inconsistencies += s.diag.inconsistencies;
    r.diag.reflections += s.diag.reflections;
    r.diag.reflected_mass += s.diag.reflected_mass;
    r.plant_reflections += s.plant_reflections;
    r.revocations += s.revocations;
    if (cfg.write_trajectories) r.logs.push_back(std::move(d.log));
  }
  for (double& v : r.pbar_fixed_time) v /= r.trajectories;
  if (r.converged > 0)
    for (double& v : r.pbar_threshold) v /= r.converged;
  r.mean_late_distance /= r.trajectories;
  r.mean_late_sq_error /= r.trajectories;
  return r;
}

struct SweepRow {
  double te_scale = 1.0, tg_scale = 1.0;
  int n_sensors = 12, n_controls = 4;
  double mean_distance = 0.0;        // steady-state estimator distance
  double mean_sq_error = 0.0;        // steady-state (n_true - n_t)^2
  double mean_convergence_ms = 0.0;  // over converged trajectories
  double converged_fraction = 0.0;
};

/// Grid evaluation with a shared base seed, ranked by steady-state distance.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepRow> rows;
  for (double te : cfg.sweep.te_scale)
    for (double tg : cfg.sweep.tg_scale)
      for (int ns : cfg.sweep.n_sensors)
        for (int nc : cfg.sweep.n_controls) {
          ExperimentConfig c = cfg;
          c.kind = ExperimentKind::ensemble;
          c.write_trajectories = false;
          c.params.te_coeff *= te;
          c.params.tg_coeff *= tg;
          c.params.n_sensors = ns;
          c.params.n_controls = nc;
          if (c.plant_params) {
            c.plant_params->n_sensors = ns;
            c.plant_params->n_controls = nc;
          }
          const EnsembleResult e = run_ensemble(c);
          SweepRow row{te, tg, ns, nc, e.mean_late_distance, e.mean_late_sq_error, 0.0,
                       static_cast<double>(e.converged) / e.trajectories};
          for (double t : e.convergence_times_ms) row.mean_convergence_ms += t;
          if (e.converged > 0) row.mean_convergence_ms /= e.converged;
          rows.push_back(row);
        }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.mean_distance < b.mean_distance;
  });
  return rows;
}

}  // namespace fockfb
