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

// Bayesian photon-number filter. Every update is linear in p(n) followed by a
// single renormalization, so mixtures over hidden events (atom occupancy,
// undetected outcomes) are exact marginalizations.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fockfb/distribution.hpp"
#include "fockfb/physics.hpp"

namespace fockfb {

enum class Role { off, sensor, emitter, absorber };

inline constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::sensor: return "sensor";
    case Role::emitter: return "emitter";
    case Role::absorber: return "absorber";
    case Role::off: break;
  }
  return "off";
}

inline std::optional<Role> parse_role(std::string_view s) {
  for (Role r : {Role::off, Role::sensor, Role::emitter, Role::absorber})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

inline constexpr bool is_actuator(Role r) { return r == Role::emitter || r == Role::absorber; }

/// Up to two atomic levels, unordered as far as the estimator is concerned.
class Outcomes {
 public:
  Outcomes() = default;
  Outcomes(std::initializer_list<Level> levels) {
    for (Level l : levels) push_back(l);
  }

  void push_back(Level l) {
    if (size_ == 2) throw std::length_error("Outcomes: at most two atoms per sample");
    v_[size_++] = l;
  }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  Level operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  const Level* begin() const { return v_.data(); }
  const Level* end() const { return v_.data() + size_; }
  int count(Level l) const { return static_cast<int>(std::count(begin(), end(), l)); }

  /// Multiset equality.
  bool same_as(const Outcomes& o) const {
    return size_ == o.size_ && count(Level::e) == o.count(Level::e);
  }

  std::string str() const {
    std::string s;
    for (Level l : *this) s += to_char(l);
    return s;
  }

 private:
  std::array<Level, 2> v_{Level::e, Level::e};
  int size_ = 0;
};

/// What the controller knows about a sample it sent.
struct SampleAnnouncement {
  Role role = Role::off;
  bool resonant = true;          // actuators: false once cancelled
  double phase = 0.0;            // sensors: Ramsey phase
  double interaction_time = 0.0; // actuators

  Level prepared() const { return role == Role::absorber ? Level::g : Level::e; }
  bool interacts() const { return is_actuator(role) && resonant; }
};

struct Diagnostics {
  long inconsistencies = 0;
  long reflections = 0;        // processes that pushed probability past n_max
  double reflected_mass = 0.0;
};

namespace detail {

inline constexpr double kImpossibleWeight = 1e-300;

/// out += weight * (single-atom transfer for outcome k) p. Emission out of
/// n_max is reflected back into n_max.
inline void add_atom_path(std::span<const double> p, Level j, Level k, double t,
                          const PhysicsParams& params, const ActuatorCalibration& calib,
                          double weight, std::span<double> out, Diagnostics* diag) {
  const int n_max = static_cast<int>(p.size()) - 1;
  const int shift = photon_shift(j, k);
  for (int m = 0; m <= n_max; ++m) {
    if (p[m] == 0.0) continue;
    const double w = weight * p[m] * actuator_likelihood(j, k, m, t, params, calib);
    if (w == 0.0) continue;
    int n = m + shift;
    if (n > n_max) {
      n = n_max;
      if (diag) {
        ++diag->reflections;
        diag->reflected_mass += w;
      }
    }
    out[n] += w;  // n >= 0: absorption from vacuum has zero likelihood
  }
}

inline std::vector<double> atom_path(std::span<const double> p, Level j, Level k, double t,
                                     const PhysicsParams& params,
                                     const ActuatorCalibration& calib, Diagnostics* diag) {
  std::vector<double> out(p.size(), 0.0);
  add_atom_path(p, j, k, t, params, calib, 1.0, out, diag);
  return out;
}

/// Probability that the detector reports exactly `observed` given the ordered
/// atom outcomes, summed over detection masks.
inline double detection_factor(std::span<const Level> outcomes, const Outcomes& observed,
                               double eta) {
  const int a = static_cast<int>(outcomes.size());
  double total = 0.0;
  for (int mask = 0; mask < (1 << a); ++mask) {
    Outcomes seen;
    for (int i = 0; i < a; ++i)
      if (mask & (1 << i)) seen.push_back(outcomes[i]);
    if (!seen.same_as(observed)) continue;
    const int hits = seen.size();
    total += std::pow(eta, hits) * std::pow(1.0 - eta, a - hits);
  }
  return total;
}

/// Unnormalized posterior contribution of the occupancy-`a` hypothesis
/// (excluding the occupancy prior), summed over every atom outcome path
/// consistent with `observed`.
inline std::vector<double> occupancy_branch(std::span<const double> p, int a, Level j,
                                            const Outcomes& observed, double t,
                                            const PhysicsParams& params,
                                            const ActuatorCalibration& calib, Diagnostics* diag) {
  std::vector<double> out(p.size(), 0.0);
  if (observed.size() > a) return out;
  if (a == 0) {
    if (observed.empty()) std::copy(p.begin(), p.end(), out.begin());
    return out;
  }
  if (a == 1) {
    for (Level k : {Level::e, Level::g}) {
      const std::array<Level, 1> path{k};
      const double f = detection_factor(path, observed, params.eta_d);
      if (f > 0.0) add_atom_path(p, j, k, t, params, calib, f, out, diag);
    }
    return out;
  }
  if (a != 2) throw std::domain_error("occupancy_branch: at most two atoms per sample");
  // Sequential model: both atoms interact for the full time t, one after the other.
  for (Level k1 : {Level::e, Level::g}) {
    const std::vector<double> mid = atom_path(p, j, k1, t, params, calib, diag);
    for (Level k2 : {Level::e, Level::g}) {
      const std::array<Level, 2> path{k1, k2};
      const double f = detection_factor(path, observed, params.eta_d);
      if (f > 0.0) add_atom_path(mid, j, k2, t, params, calib, f, out, diag);
    }
  }
  return out;
}

/// Normalizes `weights`; impossible outcomes leave `prior` unchanged.
inline PhotonDistribution finish(const PhotonDistribution& prior, std::vector<double> weights,
                                 Diagnostics* diag) {
  double z = 0.0;
  for (double& w : weights) {
    if (w < 0.0) w = 0.0;
    z += w;
  }
  if (!(z > kImpossibleWeight)) {
    if (diag) ++diag->inconsistencies;
    return prior;
  }
  return PhotonDistribution(std::move(weights));
}

}  // namespace detail

/// Posterior occupancy weights over {0,1,2} atoms given that `detected` atoms
/// were seen: Poisson(a; m) * C(a, detected) * eta^detected * (1-eta)^(a-detected).
inline std::array<double, 3> occupancy_posterior(double m, int detected, const PhysicsParams& params) {
  const auto prior = occupancy_prior(m, params.fold_occupancy_tail);
  std::array<double, 3> w{};
  double z = 0.0;
  for (int a = 0; a < 3; ++a) {
    if (detected > a) continue;
    const double binom = (a == 2 && detected == 1) ? 2.0 : 1.0;
    w[a] = prior[a] * binom * std::pow(params.eta_d, detected) *
           std::pow(1.0 - params.eta_d, a - detected);
    z += w[a];
  }
  if (z > 0.0)
    for (double& v : w) v /= z;
  return w;
}

/// Bayes update for one detected sensor atom.
inline PhotonDistribution update_sensor(const PhotonDistribution& p, Level j, double phi_r,
                                        const PhysicsParams& params, Diagnostics* diag = nullptr) {
  std::vector<double> w(p.values().begin(), p.values().end());
  for (int n = 0; n < p.size(); ++n) w[n] *= sensor_likelihood(j, n, phi_r, params);
  return detail::finish(p, std::move(w), diag);
}

/// Bayes update for a single actuator atom prepared in j and detected in k:
/// p'(n) proportional to p(n+j-k) * pi_a(j,k|n+j-k).
inline PhotonDistribution update_actuator(const PhotonDistribution& p, Level j, Level k, double t,
                                          const PhysicsParams& params,
                                          const ActuatorCalibration& calib,
                                          Diagnostics* diag = nullptr) {
  return detail::finish(p, detail::atom_path(p.values(), j, k, t, params, calib, diag), diag);
}

/// Occupancy-two hypothesis on its own: two sequential atoms, each
/// interacting for time t, with `observed` the detected subset of their outcomes.
inline PhotonDistribution two_atom_update(const PhotonDistribution& p, Level j,
                                          const Outcomes& observed, double t,
                                          const PhysicsParams& params,
                                          const ActuatorCalibration& calib,
                                          Diagnostics* diag = nullptr) {
  return detail::finish(
      p, detail::occupancy_branch(p.values(), 2, j, observed, t, params, calib, diag), diag);
}

/// Full actuator-sample posterior: mixture over occupancies {0,1,2} weighted by
/// the occupancy prior, each branch carrying its own evidence.
inline PhotonDistribution update_actuator_sample(const PhotonDistribution& p,
                                                 const SampleAnnouncement& ann,
                                                 const Outcomes& observed,
                                                 const PhysicsParams& params,
                                                 const ActuatorCalibration& calib,
                                                 Diagnostics* diag = nullptr) {
  const auto prior = occupancy_prior(params.m_control, params.fold_occupancy_tail);
  std::vector<double> acc(p.size(), 0.0);
  for (int a = 0; a < 3; ++a) {
    if (prior[a] == 0.0) continue;
    const auto branch = detail::occupancy_branch(p.values(), a, ann.prepared(), observed,
                                                 ann.interaction_time, params, calib, diag);
    for (int n = 0; n < p.size(); ++n) acc[n] += prior[a] * branch[n];
  }
  return detail::finish(p, std::move(acc), diag);
}

/// No atom detected. Sensors and non-interacting samples carry no information.
inline PhotonDistribution update_no_detection(const PhotonDistribution& p,
                                              const SampleAnnouncement& ann,
                                              const PhysicsParams& params,
                                              const ActuatorCalibration& calib,
                                              Diagnostics* diag = nullptr) {
  if (!ann.interacts()) return p;
  return update_actuator_sample(p, ann, Outcomes{}, params, calib, diag);
}

/// One atom detected; a second atom may have been missed.
inline PhotonDistribution update_partial_detection(const PhotonDistribution& p,
                                                   const SampleAnnouncement& ann, Level seen,
                                                   const PhysicsParams& params,
                                                   const ActuatorCalibration& calib,
                                                   Diagnostics* diag = nullptr) {
  if (ann.role == Role::sensor) return update_sensor(p, seen, ann.phase, params, diag);
  if (!ann.interacts()) return p;
  return update_actuator_sample(p, ann, Outcomes{seen}, params, calib, diag);
}

/// Dispatches a detection report for any sample kind.
inline PhotonDistribution update_detection(const PhotonDistribution& p,
                                           const SampleAnnouncement& ann,
                                           const Outcomes& observed, const PhysicsParams& params,
                                           const ActuatorCalibration& calib,
                                           Diagnostics* diag = nullptr) {
  if (ann.role == Role::sensor) {
    PhotonDistribution out = p;
    for (Level j : observed) out = update_sensor(out, j, ann.phase, params, diag);
    return out;
  }
  if (!ann.interacts()) return p;
  return update_actuator_sample(p, ann, observed, params, calib, diag);
}

/// Cavity damping over dt: second-order Taylor steps of the birth-death
/// generator, at least four of them and more when dt * rate is large.
inline PhotonDistribution update_relaxation(const PhotonDistribution& p, double dt,
                                            const PhysicsParams& params) {
  if (dt < 0.0) throw std::domain_error("update_relaxation: negative dt");
  if (dt == 0.0) return p;
  const BirthDeathGenerator gen = relaxation_generator(params);
  const double rate = gen.max_exit_rate();
  const long steps = std::max(4L, static_cast<long>(std::ceil(dt * rate / 0.005)));
  const double h = dt / static_cast<double>(steps);
  const int d = p.size();
  std::vector<double> x(p.values().begin(), p.values().end()), lx(d), llx(d);
  for (long s = 0; s < steps; ++s) {
    gen.apply(x.data(), lx.data());
    gen.apply(lx.data(), llx.data());
    for (int n = 0; n < d; ++n) x[n] += h * lx[n] + 0.5 * h * h * llx[n];
  }
  for (double& v : x) v = std::max(v, 0.0);
  return PhotonDistribution(std::move(x));
}

/// Outcome-averaged effect of one sample whose detection is still unknown.
inline PhotonDistribution trace_sample(const PhotonDistribution& p, const SampleAnnouncement& ann,
                                       const PhysicsParams& params,
                                       const ActuatorCalibration& calib,
                                       Diagnostics* diag = nullptr) {
  if (!ann.interacts()) return p;
  const auto prior = occupancy_prior(params.m_control, params.fold_occupancy_tail);
  const Level j = ann.prepared();
  const double t = ann.interaction_time;
  std::vector<double> acc(p.size(), 0.0);
  for (int n = 0; n < p.size(); ++n) acc[n] = prior[0] * p[n];
  for (Level k : {Level::e, Level::g})
    detail::add_atom_path(p.values(), j, k, t, params, calib, prior[1], acc, diag);
  for (Level k1 : {Level::e, Level::g}) {
    const auto mid = detail::atom_path(p.values(), j, k1, t, params, calib, diag);
    for (Level k2 : {Level::e, Level::g})
      detail::add_atom_path(mid, j, k2, t, params, calib, prior[2], acc, diag);
  }
  return detail::finish(p, std::move(acc), diag);
}

/// Traces over in-flight samples in flight order.
inline PhotonDistribution trace_pending(const PhotonDistribution& p,
                                        std::span<const SampleAnnouncement> pending,
                                        const PhysicsParams& params,
                                        const ActuatorCalibration& calib,
                                        Diagnostics* diag = nullptr) {
  PhotonDistribution out = p;
  for (const auto& ann : pending) out = trace_sample(out, ann, params, calib, diag);
  return out;
}

/// Dense column-stochastic matrix of a linear map on distributions, with the
/// nonzero row range of each column cached for fast application.
class TransferMatrix {
 public:
  TransferMatrix() = default;

  template <class LinearMap>
  static TransferMatrix from_map(int dim, LinearMap&& map) {
    TransferMatrix m;
    m.dim_ = dim;
    m.a_.assign(static_cast<std::size_t>(dim * dim), 0.0);
    m.lo_.assign(dim, 0);
    m.hi_.assign(dim, -1);
    for (int c = 0; c < dim; ++c) {
      std::vector<double> unit(dim, 0.0);
      unit[c] = 1.0;
      const std::vector<double> col = map(unit);
      for (int r = 0; r < dim; ++r) {
        m.a_[r * dim + c] = col[r];
        if (col[r] != 0.0) {
          if (m.hi_[c] < 0) m.lo_[c] = r;
          m.hi_[c] = r;
        }
      }
    }
    return m;
  }

  static TransferMatrix identity(int dim) {
    return from_map(dim, [](std::vector<double> v) { return v; });
  }

  int dim() const { return dim_; }
  double operator()(int r, int c) const { return a_[r * dim_ + c]; }

  void apply(std::span<const double> in, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (int c = 0; c < dim_; ++c) {
      const double x = in[c];
      if (x == 0.0) continue;
      for (int r = lo_[c]; r <= hi_[c]; ++r) out[r] += a_[r * dim_ + c] * x;
    }
  }

 private:
  int dim_ = 0;
  std::vector<double> a_;
  std::vector<int> lo_, hi_;
};

inline TransferMatrix relaxation_matrix(double dt, const PhysicsParams& params) {
  return TransferMatrix::from_map(params.dim(), [&](const std::vector<double>& unit) {
    const PhotonDistribution out = update_relaxation(PhotonDistribution(unit), dt, params);
    return std::vector<double>(out.values().begin(), out.values().end());
  });
}

/// Outcome- and occupancy-averaged kernel of an actuator sample.
inline TransferMatrix averaged_actuator_matrix(const SampleAnnouncement& ann,
                                               const PhysicsParams& params,
                                               const ActuatorCalibration& calib) {
  return TransferMatrix::from_map(params.dim(), [&](const std::vector<double>& unit) {
    const PhotonDistribution out = trace_sample(PhotonDistribution(unit), ann, params, calib);
    return std::vector<double>(out.values().begin(), out.values().end());
  });
}

}  // namespace fockfb
