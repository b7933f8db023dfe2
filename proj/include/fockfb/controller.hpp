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

// Feedback controller: loop schedule, distance-minimizing mode selection and
// target sequencing.
//
// Timeline of one sample interval, as seen by the controller:
//   1. a new sample is prepared with the mode planned for its schedule slot;
//      the sample prepared one interval earlier crosses the cavity,
//   2. the cavity relaxes for one interval,
//   3. the detection of the sample that crossed delay_depth intervals ago
//      arrives and is folded into the filtered distribution,
//   4. decide() revises the plan: keep/cancel for the prepared-but-not-crossed
//      actuator and modes for the control slots not yet prepared.

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fockfb/distribution.hpp"
#include "fockfb/estimator.hpp"
#include "fockfb/physics.hpp"

namespace fockfb {

/// One revisable choice. `offset` 0 is the prepared sample waiting to cross
/// the cavity; offsets >= 1 are future preparations in schedule order.
struct Decision {
  int offset = 0;
  int position = 0;  // schedule position of the sample
  Role mode = Role::sensor;
  bool keep_resonant = true;
};

struct DecisionSet {
  std::vector<Decision> decisions;
  double expected_distance = 0.0;
  double all_sensor_distance = 0.0;  // plan with no new actuators and the in-flight one cancelled
  long combinations = 0;

  std::optional<bool> keep_in_flight() const {
    for (const auto& d : decisions)
      if (d.offset == 0) return d.keep_resonant;
    return std::nullopt;
  }
  std::optional<Role> mode_for(int position) const {
    for (const auto& d : decisions)
      if (d.offset > 0 && d.position == position) return d.mode;
    return std::nullopt;
  }
};

struct LoopState {
  PhotonDistribution filtered;                // conditioned on every detection received
  TargetSpec target;
  int position = 0;                           // schedule slot of the next preparation
  std::optional<SampleAnnouncement> in_flight;  // prepared, not yet crossed: revocable
  std::deque<SampleAnnouncement> pending;     // crossed, detection not yet received
  std::vector<Role> plan;                     // planned mode per schedule slot
  Diagnostics diag;
};

inline int loop_length(const PhysicsParams& params) { return params.n_sensors + params.n_controls; }

/// Role of the next sample to prepare.
inline Role schedule_next(const LoopState& state, const PhysicsParams& params) {
  if (state.position < params.n_sensors) return Role::sensor;
  if (state.position < static_cast<int>(state.plan.size())) return state.plan[state.position];
  return Role::sensor;
}

inline bool stop_rule(const PhotonDistribution& p, int n_target, double threshold) {
  return n_target >= 0 && n_target < p.size() && p[n_target] > threshold;
}

struct TargetSwitch {
  double time = 0.0;
  int from = 0;
  int to = 0;
};

/// Steps through a programmed list of targets, advancing whenever the
/// estimated population of the current target exceeds the threshold.
class TargetSequencer {
 public:
  TargetSequencer(std::vector<int> sequence, double threshold)
      : sequence_(std::move(sequence)), threshold_(threshold) {
    if (sequence_.empty()) throw ConfigError("targets", "sequence must not be empty");
    if (!(threshold_ > 0.0 && threshold_ < 1.0))
      throw ConfigError("threshold", "must lie in (0,1)");
  }

  int current() const { return sequence_[index_]; }
  bool exhausted() const { return index_ + 1 >= sequence_.size(); }
  std::size_t index() const { return index_; }
  const std::vector<TargetSwitch>& switches() const { return switches_; }

  /// Returns the switch event if the target changed.
  std::optional<TargetSwitch> step(const PhotonDistribution& p, double time) {
    if (exhausted() || !stop_rule(p, current(), threshold_)) return std::nullopt;
    TargetSwitch s{time, current(), sequence_[index_ + 1]};
    ++index_;
    switches_.push_back(s);
    return s;
  }

 private:
  std::vector<int> sequence_;
  double threshold_;
  std::size_t index_ = 0;
  std::vector<TargetSwitch> switches_;
};

/// Owns the loop state of one trajectory and the kernels needed to plan.
class Controller {
 public:
  Controller(PhysicsParams params, ActuatorCalibration calib, int n_target)
      : params_(std::move(params)), calib_(std::move(calib)) {
    params_.validate();
    calib_.validate(params_.n_max);
    relax_ = relaxation_matrix(params_.t_sample, params_);
    state_.filtered = PhotonDistribution::fock(0, params_.n_max);
    state_.plan.assign(loop_length(params_), Role::sensor);
    set_target(n_target);
  }

  const LoopState& state() const { return state_; }
  const PhysicsParams& params() const { return params_; }
  const ActuatorCalibration& calibration() const { return calib_; }
  const TargetSpec& target() const { return state_.target; }

  void set_target(int n_target) {
    state_.target = TargetSpec::make(n_target, params_);
    emitter_ = kernel_for(Role::emitter, state_.target.t_e);
    absorber_ = kernel_for(Role::absorber, state_.target.t_g);
  }

  SampleAnnouncement announcement_for(Role role) const {
    SampleAnnouncement a;
    a.role = role;
    a.phase = state_.target.phi_r;
    if (role == Role::emitter) a.interaction_time = state_.target.t_e;
    if (role == Role::absorber) a.interaction_time = state_.target.t_g;
    return a;
  }

  /// Prepares the next scheduled sample. Returns the sample that crosses the
  /// cavity this interval (the previously prepared one, or an empty `off`
  /// sample on the first interval) and the newly prepared one.
  std::pair<SampleAnnouncement, SampleAnnouncement> advance() {
    SampleAnnouncement crossing = state_.in_flight.value_or(SampleAnnouncement{});
    state_.pending.push_back(crossing);
    SampleAnnouncement fresh = announcement_for(schedule_next(state_, params_));
    state_.in_flight = fresh;
    state_.position = (state_.position + 1) % loop_length(params_);
    return {crossing, fresh};
  }

  /// Folds in the detection of the oldest crossed sample, then one interval
  /// of damping.
  SampleAnnouncement on_detection(const Outcomes& observed) {
    if (state_.pending.empty()) throw std::logic_error("on_detection: nothing in flight");
    SampleAnnouncement ann = state_.pending.front();
    state_.pending.pop_front();
    PhotonDistribution p =
        update_detection(state_.filtered, ann, observed, params_, calib_, &state_.diag);
    state_.filtered = apply(relax_, p);
    return ann;
  }

  /// Best current estimate: the filtered distribution traced over the crossed
  /// but undetected samples, with damping between crossings. Refers to the
  /// instant just before the in-flight sample crosses.
  PhotonDistribution estimate() const {
    PhotonDistribution p = state_.filtered;
    for (const auto& ann : state_.pending) {
      if (ann.interacts()) p = apply(kernel_for(ann), p);
      p = apply(relax_, p);
    }
    return p;
  }

  /// Exhaustive search over the revisable choices within the decision
  /// horizon; see plan_from().
  DecisionSet decide(const PhotonDistribution& now) {
    DecisionSet set = plan_from(now);
    if (auto keep = set.keep_in_flight(); keep && state_.in_flight)
      state_.in_flight->resonant = *keep;
    for (const auto& d : set.decisions)
      if (d.offset > 0) state_.plan[d.position] = d.mode;
    return set;
  }

  DecisionSet plan_from(const PhotonDistribution& now) const;

  /// plan_from() with a custom objective on the predicted distribution.
  DecisionSet plan_with(const PhotonDistribution& now,
                        std::function<double(std::span<const double>)> objective) const;

 private:
  static PhotonDistribution apply(const TransferMatrix& m, const PhotonDistribution& p) {
    std::vector<double> out(p.size());
    m.apply(p.values(), out);
    for (double& v : out) v = std::max(v, 0.0);
    return PhotonDistribution(std::move(out));
  }

  TransferMatrix kernel_for(Role role, double t) const {
    SampleAnnouncement a;
    a.role = role;
    a.interaction_time = t;
    return averaged_actuator_matrix(a, params_, calib_);
  }

  const TransferMatrix& kernel_for(const SampleAnnouncement& ann) const {
    if (ann.role == Role::emitter && ann.interaction_time == state_.target.t_e) return emitter_;
    if (ann.role == Role::absorber && ann.interaction_time == state_.target.t_g) return absorber_;
    scratch_ = kernel_for(ann.role, ann.interaction_time);
    return scratch_;
  }

  PhysicsParams params_;
  ActuatorCalibration calib_;
  LoopState state_;
  TransferMatrix relax_, emitter_, absorber_;
  mutable TransferMatrix scratch_;
};

namespace detail {

// Mode preference for tie-breaking: smaller is preferred.
inline int preference(Role r) {
  switch (r) {
    case Role::sensor: return 0;
    case Role::absorber: return 1;
    case Role::emitter: return 2;
    case Role::off: break;
  }
  return 3;
}

struct PlanSearch {
  const TransferMatrix* relax = nullptr;
  const TransferMatrix* emitter = nullptr;
  const TransferMatrix* absorber = nullptr;
  const TransferMatrix* in_flight = nullptr;  // null if the in-flight sample is not an actuator
  std::function<double(std::span<const double>)> objective;
  int dim = 0;
  std::vector<bool> is_choice;  // per future slot (offset >= 1)
  std::vector<std::vector<double>> buf;

  std::vector<Role> modes, best_modes;
  bool keep = false, best_keep = false;
  double best = 0.0;
  bool have_best = false;
  long leaves = 0;
  double all_sensor = 0.0;

  bool better(double d) const {
    if (!have_best) return true;
    const double tol = 1e-12 * std::max(std::abs(d), std::abs(best));
    if (d < best - tol) return true;
    if (d > best + tol) return false;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const int a = preference(modes[i]), b = preference(best_modes[i]);
      if (a != b) return a < b;
    }
    auto resonant = [](const std::vector<Role>& ms, bool k) {
      long c = k ? 1 : 0;
      for (Role r : ms) c += is_actuator(r);
      return c;
    };
    return resonant(modes, keep) < resonant(best_modes, best_keep);
  }

  // Evolves buf[depth] through future slot `slot` (1-based) and beyond.
  void descend(std::size_t slot, int depth, std::size_t choice_index) {
    const std::vector<double>& cur = buf[depth];
    if (slot > is_choice.size()) {
      ++leaves;
      const double d = objective(cur);
      bool all_sensor_plan = !keep;
      for (Role r : modes) all_sensor_plan = all_sensor_plan && r == Role::sensor;
      if (all_sensor_plan) all_sensor = d;
      if (better(d)) {
        best = d;
        best_modes = modes;
        best_keep = keep;
        have_best = true;
      }
      return;
    }
    std::vector<double>& mid = buf[depth + 1];
    std::vector<double>& next = buf[depth + 2];
    if (!is_choice[slot - 1]) {
      relax->apply(cur, next);
      descend(slot + 1, depth + 2, choice_index);
      return;
    }
    for (Role r : {Role::sensor, Role::absorber, Role::emitter}) {
      modes[choice_index] = r;
      if (r == Role::sensor) {
        relax->apply(cur, next);
      } else {
        (r == Role::emitter ? emitter : absorber)->apply(cur, mid);
        relax->apply(mid, next);
      }
      descend(slot + 1, depth + 2, choice_index + 1);
    }
  }
};

}  // namespace detail

inline DecisionSet Controller::plan_from(const PhotonDistribution& now) const {
  const int n_t = state_.target.n_target;
  return plan_with(now, [n_t](std::span<const double> p) { return distance(p, n_t); });
}

inline DecisionSet Controller::plan_with(const PhotonDistribution& now,
                                         std::function<double(std::span<const double>)> objective) const {
  const int L = loop_length(params_);
  const int q = state_.position;
  int horizon = L - q;  // future preparations up to the end of this loop
  if (params_.decision_horizon > 0) horizon = std::min(horizon, params_.decision_horizon);

  detail::PlanSearch s;
  s.relax = &relax_;
  s.emitter = &emitter_;
  s.absorber = &absorber_;
  s.objective = std::move(objective);
  s.dim = params_.dim();
  std::vector<int> choice_positions;
  for (int k = 0; k < horizon; ++k) {
    const bool control = q + k >= params_.n_sensors;
    s.is_choice.push_back(control);
    if (control) choice_positions.push_back(q + k);
  }
  s.modes.assign(choice_positions.size(), Role::sensor);
  s.buf.assign(2 * horizon + 4, std::vector<double>(s.dim, 0.0));

  const bool revisable = state_.in_flight && is_actuator(state_.in_flight->role);
  TransferMatrix in_flight_kernel;
  if (revisable) in_flight_kernel = kernel_for(*state_.in_flight);

  // Offset 0: the in-flight sample crosses first.
  for (int keep = 0; keep < (revisable ? 2 : 1); ++keep) {
    s.keep = keep == 1;
    std::vector<double> start(now.values().begin(), now.values().end());
    if (s.keep) {
      in_flight_kernel.apply(now.values(), s.buf[1]);
      start = s.buf[1];
    }
    relax_.apply(start, s.buf[0]);
    s.descend(1, 0, 0);
  }

  DecisionSet out;
  out.expected_distance = s.best;
  out.all_sensor_distance = s.all_sensor;
  out.combinations = s.leaves;
  if (revisable) out.decisions.push_back({0, (q + L - 1) % L, state_.in_flight->role, s.best_keep});
  for (std::size_t i = 0; i < choice_positions.size(); ++i) {
    const int pos = choice_positions[i];
    out.decisions.push_back({pos - q + 1, pos, s.best_modes[i], true});
  }
  return out;
}

/// Free-function form for one-off use.
inline DecisionSet decide(const Controller& controller, const PhotonDistribution& now) {
  return controller.plan_from(now);
}

}  // namespace fockfb
