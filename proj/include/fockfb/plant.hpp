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

// Ground-truth Monte Carlo of the cavity, the atom samples and the detector.

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>

#include "fockfb/estimator.hpp"
#include "fockfb/physics.hpp"

namespace fockfb {

using Rng = std::mt19937_64;

/// Deterministic per-trajectory stream derived from a master seed.
struct RngSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory = 0;

  Rng make() const {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trajectory),
                      static_cast<std::uint32_t>(trajectory >> 32), 0x5eedu};
    return Rng(seq);
  }
};

/// Atom count of one sample: Poisson(m) restricted to {0,1,2}, sharing the
/// estimator's occupancy prior.
inline int sample_occupancy(double m, Rng& rng, bool fold_tail = true) {
  if (m < 0.0) throw std::domain_error("sample_occupancy: negative mean");
  if (m == 0.0) return 0;
  const auto w = occupancy_prior(m, fold_tail);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < w[0]) return 0;
  if (u < w[0] + w[1]) return 1;
  return 2;
}

/// Exact jump-process sampling of cavity damping over dt. Thermal excitation
/// out of n_max is suppressed, mirroring the truncated generator.
inline int evolve_cavity(int n, double dt, const PhysicsParams& params, Rng& rng) {
  if (dt < 0.0) throw std::domain_error("evolve_cavity: negative dt");
  const double gamma = 1.0 / params.t_cavity;
  double t = 0.0;
  while (true) {
    const double down = gamma * (1.0 + params.n_thermal) * n;
    const double up = n < params.n_max ? gamma * params.n_thermal * (n + 1) : 0.0;
    const double total = down + up;
    if (total <= 0.0) return n;
    t += std::exponential_distribution<double>(total)(rng);
    if (t > dt) return n;
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    n += (u < down) ? -1 : 1;
  }
}

inline Level interact_sensor_true(int n, double phi_r, const PhysicsParams& params, Rng& rng) {
  const double pe = sensor_likelihood(Level::e, n, phi_r, params);
  const double pg = sensor_likelihood(Level::g, n, phi_r, params);
  const double u = std::uniform_real_distribution<double>(0.0, pe + pg)(rng);
  return u < pe ? Level::e : Level::g;
}

struct ActuatorOutcome {
  Level k = Level::e;
  int n = 0;
  bool reflected = false;  // emission attempted out of n_max
};

inline ActuatorOutcome interact_actuator_true(int n, Level j, double t, const PhysicsParams& params,
                                              const ActuatorCalibration& calib, Rng& rng) {
  const double stay = actuator_likelihood(j, j, n, t, params, calib);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < stay) return {j, n, false};
  const Level k = j == Level::e ? Level::g : Level::e;
  int next = n + photon_shift(j, k);
  bool reflected = false;
  if (next > params.n_max) {
    next = params.n_max;
    reflected = true;
  }
  return {k, next, reflected};
}

/// Each atom independently detected with probability eta.
inline Outcomes detect(const Outcomes& atoms, double eta, Rng& rng) {
  Outcomes seen;
  std::bernoulli_distribution hit(eta);
  for (Level l : atoms)
    if (hit(rng)) seen.push_back(l);
  return seen;
}

/// Fixed-depth FIFO. push() returns the element leaving the line, if any;
/// a depth of zero passes elements straight through.
template <class T>
class DelayLine {
 public:
  explicit DelayLine(std::size_t depth) : depth_(depth) {}

  std::optional<T> push(T item) {
    items_.push_back(std::move(item));
    if (items_.size() <= depth_) return std::nullopt;
    T out = std::move(items_.front());
    items_.pop_front();
    return out;
  }

  std::size_t depth() const { return depth_; }
  std::size_t size() const { return items_.size(); }
  const std::deque<T>& contents() const { return items_; }

 private:
  std::size_t depth_;
  std::deque<T> items_;
};

/// Ground truth of one sample after it crossed the cavity.
struct PlantSample {
  long id = 0;
  SampleAnnouncement ann;
  int occupancy = 0;
  Outcomes atoms;  // final atomic levels, in crossing order
};

struct DetectionEvent {
  PlantSample sample;
  Outcomes detected;
};

class Plant {
 public:
  Plant(PhysicsParams params, ActuatorCalibration calib, Rng rng)
      : params_(std::move(params)),
        calib_(std::move(calib)),
        rng_(std::move(rng)),
        line_(static_cast<std::size_t>(params_.delay_depth)) {
    calib_.validate(params_.n_max);
  }

  int n_true() const { return n_; }
  double time() const { return time_; }
  long reflections() const { return reflections_; }
  const DelayLine<PlantSample>& pipeline() const { return line_; }
  const PhysicsParams& params() const { return params_; }

  /// Sample `ann` crosses the cavity now. Returns its ground truth and, if the
  /// pipeline is full, the detection of the oldest sample in flight.
  std::pair<PlantSample, std::optional<DetectionEvent>> cross(const SampleAnnouncement& ann) {
    PlantSample s;
    s.id = next_id_++;
    s.ann = ann;
    if (ann.role == Role::sensor) {
      s.occupancy = sample_occupancy(params_.m_sensor, rng_, params_.fold_occupancy_tail);
      for (int i = 0; i < s.occupancy; ++i)
        s.atoms.push_back(interact_sensor_true(n_, ann.phase, params_, rng_));
    } else if (is_actuator(ann.role)) {
      s.occupancy = sample_occupancy(params_.m_control, rng_, params_.fold_occupancy_tail);
      for (int i = 0; i < s.occupancy; ++i) {
        if (!ann.resonant) {
          s.atoms.push_back(ann.prepared());
          continue;
        }
        const auto r = interact_actuator_true(n_, ann.prepared(), ann.interaction_time, params_,
                                              calib_, rng_);
        reflections_ += r.reflected;
        n_ = r.n;
        s.atoms.push_back(r.k);
      }
    }
    std::optional<DetectionEvent> event;
    if (auto out = line_.push(s)) {
      Outcomes seen = detect(out->atoms, params_.eta_d, rng_);
      event = DetectionEvent{std::move(*out), seen};
    }
    return {s, event};
  }

  void evolve(double dt) {
    n_ = evolve_cavity(n_, dt, params_, rng_);
    time_ += dt;
  }

 private:
  PhysicsParams params_;
  ActuatorCalibration calib_;
  Rng rng_;
  DelayLine<PlantSample> line_;
  int n_ = 0;
  double time_ = 0.0;
  long next_id_ = 0;
  long reflections_ = 0;
};

}  // namespace fockfb
