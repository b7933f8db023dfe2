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

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace fockfb {

/// Normalized photon-number distribution p(n), n = 0..n_max.
class PhotonDistribution {
 public:
  PhotonDistribution() = default;

  /// Takes non-negative weights and normalizes them.
  explicit PhotonDistribution(std::vector<double> weights) : p_(std::move(weights)) {
    const double z = std::accumulate(p_.begin(), p_.end(), 0.0);
    if (p_.empty() || !(z > 0.0) || !std::isfinite(z))
      throw std::invalid_argument("PhotonDistribution: weights must have positive finite sum");
    for (double& v : p_) {
      if (v < 0.0) throw std::invalid_argument("PhotonDistribution: negative weight");
      v /= z;
    }
  }

  static PhotonDistribution fock(int n, int n_max) {
    if (n < 0 || n > n_max) throw std::domain_error("fock: n out of range");
    std::vector<double> p(n_max + 1, 0.0);
    p[n] = 1.0;
    return PhotonDistribution(std::move(p));
  }

  static PhotonDistribution uniform(int n_max) {
    return PhotonDistribution(std::vector<double>(n_max + 1, 1.0));
  }

  /// Truncated Bose-Einstein distribution with mean photon number `n_th`
  /// (before truncation).
  static PhotonDistribution thermal(double n_th, int n_max) {
    if (n_th <= 0.0) return fock(0, n_max);
    const double ratio = n_th / (1.0 + n_th);
    std::vector<double> p(n_max + 1);
    double w = 1.0;
    for (double& v : p) {
      v = w;
      w *= ratio;
    }
    return PhotonDistribution(std::move(p));
  }

  int size() const { return static_cast<int>(p_.size()); }
  int n_max() const { return size() - 1; }
  double operator[](int n) const { return p_[static_cast<std::size_t>(n)]; }
  std::span<const double> values() const { return p_; }

  double total() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

  double mean() const {
    double m = 0.0;
    for (int n = 0; n < size(); ++n) m += n * p_[n];
    return m;
  }

  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (int n = 0; n < size(); ++n) v += (n - m) * (n - m) * p_[n];
    return v;
  }

 private:
  std::vector<double> p_;
};

/// Controller cost: sum_n (n - n_t)^2 p(n), i.e. variance plus squared bias.
inline double distance(const PhotonDistribution& p, int n_target) {
  double d = 0.0;
  for (int n = 0; n < p.size(); ++n) d += double(n - n_target) * double(n - n_target) * p[n];
  return d;
}

inline double distance(std::span<const double> p, int n_target) {
  double d = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double diff = static_cast<double>(n) - n_target;
    d += diff * diff * p[n];
  }
  return d;
}

}  // namespace fockfb
