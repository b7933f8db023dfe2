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
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fockfb {

inline constexpr double pi = std::numbers::pi;

/// Atomic level as reported by the detector. The numeric value is the
/// index used in the likelihood formulas: 0 for the upper level e, 1 for g.
enum class Level : int { e = 0, g = 1 };

inline constexpr int index(Level l) { return static_cast<int>(l); }
inline constexpr char to_char(Level l) { return l == Level::e ? 'e' : 'g'; }

/// Raised by validation routines; `field` names the offending parameter.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Physical and loop constants. Times in seconds, angular frequencies in rad/s.
struct PhysicsParams {
  double t_cavity = 65e-3;
  double n_thermal = 0.05;
  double t_sample = 82e-6;
  double omega0 = 2.0 * pi * 47.9e3;
  double phi0 = 0.252 * pi;
  double eta_d = 0.25;
  double m_sensor = 1.3;
  double m_control = 0.5;
  int n_sensors = 12;
  int n_controls = 4;
  double b_s = 0.02;
  double c_s = 0.75;
  int n_max = 12;
  int delay_depth = 4;

  // Actuator interaction times are te_coeff*pi/(omega0*sqrt(n_t+1)) and
  // tg_coeff*pi/(omega0*sqrt(n_t)).
  double te_coeff = 1.6;
  double tg_coeff = 2.4;

  // Fold the Poisson tail of three or more atoms into the two-atom weight.
  // When false, the {0,1,2} weights are simply truncated and renormalized.
  bool fold_occupancy_tail = true;

  // Number of upcoming preparations the controller plans over. 1 decides
  // only the sample about to be prepared; 0 extends to the end of the loop.
  int decision_horizon = 1;

  // Recorded for provenance only; no computation depends on these.
  double detuning_hz = 244e3;
  double atom_velocity = 250.0;

  int dim() const { return n_max + 1; }

  /// Throws ConfigError on the first violated invariant. Returns soft warnings.
  std::vector<std::string> validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be strictly positive");
    };
    positive(t_cavity, "t_cavity");
    positive(t_sample, "t_sample");
    positive(omega0, "omega0");
    positive(te_coeff, "te_coeff");
    positive(tg_coeff, "tg_coeff");
    if (!(n_thermal >= 0.0)) throw ConfigError("n_thermal", "must be non-negative");
    if (!(eta_d >= 0.0 && eta_d <= 1.0)) throw ConfigError("eta_d", "must lie in [0,1]");
    if (!(c_s >= 0.0 && c_s <= 1.0)) throw ConfigError("c_s", "must lie in [0,1]");
    if (!(m_sensor >= 0.0)) throw ConfigError("m_sensor", "must be non-negative");
    if (!(m_control >= 0.0)) throw ConfigError("m_control", "must be non-negative");
    if (n_sensors < 1) throw ConfigError("n_sensors", "must be at least 1");
    if (n_controls < 0) throw ConfigError("n_controls", "must be non-negative");
    if (n_max < 8) throw ConfigError("n_max", "must be at least 8");
    if (delay_depth < 0) throw ConfigError("delay_depth", "must be non-negative");
    if (decision_horizon < 0) throw ConfigError("decision_horizon", "must be non-negative");
    std::vector<std::string> warnings;
    if (t_sample / t_cavity > 0.01)
      warnings.push_back("t_sample/t_cavity exceeds 0.01; per-interval damping is no longer small");
    return warnings;
  }
};

/// Per-photon-number contrast and phase offset of the actuator Rabi law.
struct ActuatorCalibration {
  std::vector<double> contrast;
  std::vector<double> phase;

  static ActuatorCalibration ideal(int n_max) {
    return {std::vector<double>(n_max + 1, 1.0), std::vector<double>(n_max + 1, 0.0)};
  }

  /// contrast(n) = c0 * exp(-n / n_decay), zero phase offset.
  static ActuatorCalibration parametric(int n_max, double c0 = 0.9, double n_decay = 20.0) {
    ActuatorCalibration c;
    for (int n = 0; n <= n_max; ++n) {
      c.contrast.push_back(c0 * std::exp(-n / n_decay));
      c.phase.push_back(0.0);
    }
    c.validate(n_max);
    return c;
  }

  /// Parses rows `n, contrast, phase_offset_rad` (comma or whitespace
  /// separated). Blank lines, `#` comments and a non-numeric header are skipped.
  static ActuatorCalibration parse(std::istream& in, int n_max) {
    ActuatorCalibration c;
    std::string line;
    int line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      for (char& ch : line)
        if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
      std::istringstream row(line);
      std::string first;
      if (!(row >> first)) continue;
      int n = 0;
      double contrast = 0.0, phase = 0.0;
      try {
        std::size_t used = 0;
        n = std::stoi(first, &used);
        if (used != first.size()) throw std::invalid_argument(first);
      } catch (const std::exception&) {
        if (header_allowed && c.contrast.empty()) {  // header
          header_allowed = false;
          continue;
        }
        throw ConfigError("calibration", "line " + std::to_string(line_no) + ": bad photon number");
      }
      if (!(row >> contrast >> phase))
        throw ConfigError("calibration", "line " + std::to_string(line_no) + ": expected 3 columns");
      if (n != static_cast<int>(c.contrast.size()))
        throw ConfigError("calibration", "line " + std::to_string(line_no) +
                                             ": rows must be strictly increasing from n = 0");
      c.contrast.push_back(contrast);
      c.phase.push_back(phase);
    }
    c.validate(n_max);
    return c;
  }

  static ActuatorCalibration load(const std::string& path, int n_max) {
    std::ifstream in(path);
    if (!in) throw ConfigError("calibration", "cannot open " + path);
    return parse(in, n_max);
  }

  void validate(int n_max) const {
    if (contrast.size() != phase.size() || static_cast<int>(contrast.size()) < n_max + 1)
      throw ConfigError("calibration", "table must cover n = 0.." + std::to_string(n_max));
    for (double c : contrast)
      if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("calibration", "contrast outside [0,1]");
  }
};

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double x) {
  double r = std::remainder(x, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

/// Ramsey phase centring the sensor fringe on `n_target`.
inline double sensor_phase(int n_target, double phi0) {
  if (n_target < 1) throw std::domain_error("sensor_phase: target must be >= 1");
  return wrap_phase(pi / 2.0 - phi0 * n_target);
}

struct TargetSpec {
  int n_target = 1;
  double phi_r = 0.0;
  double t_e = 0.0;
  double t_g = 0.0;

  static TargetSpec make(int n_target, const PhysicsParams& params) {
    if (n_target < 1 || n_target > params.n_max - 4)
      throw ConfigError("target", "must lie in [1, n_max - 4] = [1, " +
                                      std::to_string(params.n_max - 4) + "]");
    TargetSpec t;
    t.n_target = n_target;
    t.phi_r = sensor_phase(n_target, params.phi0);
    t.t_e = params.te_coeff * pi / (params.omega0 * std::sqrt(n_target + 1.0));
    t.t_g = params.tg_coeff * pi / (params.omega0 * std::sqrt(static_cast<double>(n_target)));
    return t;
  }
};

/// Probability (unnormalized by the b_s offset) of detecting a sensor atom in
/// `j` with `n` photons stored. The pair sums to 1 + b_s/2.
inline double sensor_likelihood(Level j, int n, double phi_r, const PhysicsParams& params) {
  if (n < 0 || n > params.n_max) throw std::domain_error("sensor_likelihood: n out of range");
  const int ji = index(j);
  return 0.5 * (1.0 + ji * params.b_s +
                params.c_s * std::cos(params.phi0 * n + phi_r - ji * pi));
}

/// Probability that an actuator prepared in `j` is found in `k` after
/// interacting for time `t` with `m` photons initially in the cavity.
///
/// Calibrated Rabi law {1 + c(m) cos[omega0 t sqrt(m-j+1) + (j-k)pi + beta(m)]}/2.
/// An absorber cannot flip in vacuum.
inline double actuator_likelihood(Level j, Level k, int m, double t, const PhysicsParams& params,
                                  const ActuatorCalibration& calib) {
  if (m < 0) throw std::domain_error("actuator_likelihood: negative photon number");
  if (m >= static_cast<int>(calib.contrast.size()))
    throw std::domain_error("actuator_likelihood: photon number beyond calibration table");
  if (j == Level::g && m == 0) return k == Level::g ? 1.0 : 0.0;
  const int rabi_index = m - index(j) + 1;
  const double theta = params.omega0 * t * std::sqrt(static_cast<double>(rabi_index)) + calib.phase[m];
  // cos(x + (j-k)pi) = +/- cos(x); written this way the pair sums to one exactly.
  const double sign = (j == k) ? 1.0 : -1.0;
  return 0.5 * (1.0 + sign * calib.contrast[m] * std::cos(theta));
}

/// Photon number after an actuator prepared in j is detected in k.
/// Emission (e -> g) adds a photon, absorption (g -> e) removes one.
inline constexpr int photon_shift(Level j, Level k) { return index(k) - index(j); }

/// Birth-death generator of cavity damping towards the thermal state.
/// Column-stochastic convention: (L p)(n) = sum_m L(n,m) p(m).
struct BirthDeathGenerator {
  std::vector<double> down;  // rate n -> n-1
  std::vector<double> up;    // rate n -> n+1 (zero at n_max)

  int dim() const { return static_cast<int>(down.size()); }

  double max_exit_rate() const {
    double r = 0.0;
    for (int n = 0; n < dim(); ++n) r = std::max(r, down[n] + up[n]);
    return r;
  }

  /// out = L * p.
  void apply(const double* p, double* out) const {
    const int d = dim();
    for (int n = 0; n < d; ++n) {
      double v = -(down[n] + up[n]) * p[n];
      if (n + 1 < d) v += down[n + 1] * p[n + 1];
      if (n > 0) v += up[n - 1] * p[n - 1];
      out[n] = v;
    }
  }

  /// Dense row-major matrix, mainly for tests.
  std::vector<double> dense() const {
    const int d = dim();
    std::vector<double> m(static_cast<std::size_t>(d * d), 0.0);
    for (int n = 0; n < d; ++n) {
      m[n * d + n] = -(down[n] + up[n]);
      if (n > 0) m[(n - 1) * d + n] = down[n];
      if (n + 1 < d) m[(n + 1) * d + n] = up[n];
    }
    return m;
  }
};

inline BirthDeathGenerator relaxation_generator(const PhysicsParams& params) {
  BirthDeathGenerator g;
  const double gamma = 1.0 / params.t_cavity;
  for (int n = 0; n <= params.n_max; ++n) {
    g.down.push_back(gamma * (1.0 + params.n_thermal) * n);
    g.up.push_back(n < params.n_max ? gamma * params.n_thermal * (n + 1) : 0.0);
  }
  return g;
}

/// Occupancy prior over {0,1,2} atoms for a Poisson mean `m`.
inline std::array<double, 3> occupancy_prior(double m, bool fold_tail) {
  const double p0 = std::exp(-m);
  const double p1 = m * p0;
  if (fold_tail) return {p0, p1, std::max(0.0, 1.0 - p0 - p1)};
  const double p2 = 0.5 * m * m * p0;
  const double z = p0 + p1 + p2;
  return {p0 / z, p1 / z, p2 / z};
}

}  // namespace fockfb
