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

#include <gtest/gtest.h>

#include "enumeration_oracle.hpp"
#include "fockfb/fockfb.hpp"
#include "oracle_values.hpp"
#include "test_util.hpp"

namespace fockfb {
namespace {

using testing_util::max_abs_diff;
using testing_util::random_distribution;
using testing_util::total;

PhotonDistribution on(std::vector<std::pair<int, double>> mass, int n_max = 12) {
  std::vector<double> w(n_max + 1, 0.0);
  for (auto [n, v] : mass) w[n] = v;
  return PhotonDistribution(std::move(w));
}

SampleAnnouncement actuator(Role role, double t) {
  SampleAnnouncement a;
  a.role = role;
  a.interaction_time = t;
  return a;
}

double trapping_time(int n, const PhysicsParams& p) { return 2 * pi / (p.omega0 * std::sqrt(n + 1.0)); }

TEST(UpdateSensor, PointMassIsInvariant) {
  PhysicsParams p;
  const auto d0 = PhotonDistribution::fock(0, p.n_max);
  for (Level j : {Level::e, Level::g})
    EXPECT_EQ(update_sensor(d0, j, 0.3, p).values()[0], 1.0);
}

TEST(UpdateSensor, UniformPriorQuarterTurn) {
  PhysicsParams p = testing_util::ideal_sensor_params();
  p.phi0 = pi / 4;
  std::vector<std::pair<int, double>> mass;
  for (int n = 0; n < 8; ++n) mass.emplace_back(n, 1.0);
  const auto post = update_sensor(on(mass), Level::e, 0.0, p);
  for (int n = 0; n < 8; ++n) EXPECT_NEAR(post[n], oracle::sensor_uniform_posterior[n], 1e-15);
}

TEST(UpdateSensor, RepeatedOutcomesMatchClosedFormProduct) {
  PhysicsParams p;
  const int n_t = 3;
  const double phi_r = sensor_phase(n_t, p.phi0);
  std::mt19937_64 rng(11);
  std::bernoulli_distribution coin(0.5);
  auto filt = PhotonDistribution::uniform(p.n_max);
  std::vector<double> product(p.dim(), 1.0);
  for (int step = 0; step < 20; ++step) {
    const Level j = coin(rng) ? Level::e : Level::g;
    filt = update_sensor(filt, j, phi_r, p);
    for (int n = 0; n <= p.n_max; ++n) product[n] *= sensor_likelihood(j, n, phi_r, p);
  }
  const PhotonDistribution expect(product);
  EXPECT_LT(max_abs_diff(filt.values(), expect.values()), 1e-12);
}

TEST(UpdateSensor, RepeatedSameOutcomeConcentratesOnFringeMaximum) {
  PhysicsParams p = testing_util::ideal_sensor_params();
  p.phi0 = pi / 4;
  auto filt = PhotonDistribution::uniform(7);
  p.n_max = 7;
  for (int i = 0; i < 60; ++i) filt = update_sensor(filt, Level::e, 0.0, p);
  EXPECT_GT(filt[0], 0.99);  // cos(n pi/4) is maximal at n = 0 within 0..7
}

TEST(UpdateSensor, ImpossibleOutcomeLeavesPriorAndCounts) {
  PhysicsParams p = testing_util::ideal_sensor_params();
  const auto d0 = PhotonDistribution::fock(0, p.n_max);
  Diagnostics diag;
  const auto out = update_sensor(d0, Level::g, 0.0, p, &diag);  // (1 + cos(-pi))/2 = 0
  EXPECT_EQ(out.values()[0], 1.0);
  EXPECT_EQ(diag.inconsistencies, 1);
}

TEST(UpdateActuator, TrappedTargetStaysPut) {
  PhysicsParams p;
  const auto ideal = ActuatorCalibration::ideal(p.n_max);
  for (int n_t = 1; n_t <= 8; ++n_t) {
    const auto d = PhotonDistribution::fock(n_t, p.n_max);
    const auto out = update_actuator(d, Level::e, Level::e, trapping_time(n_t, p), p, ideal);
    EXPECT_LT(max_abs_diff(out.values(), d.values()), 1e-12);
  }
}

TEST(UpdateActuator, AbsorberInVacuum) {
  PhysicsParams p;
  const auto d0 = PhotonDistribution::fock(0, p.n_max);
  const auto out = update_actuator(d0, Level::g, Level::g, 1e-5, p, ActuatorCalibration::ideal(p.n_max));
  EXPECT_EQ(out.values()[0], 1.0);
  Diagnostics diag;
  update_actuator(d0, Level::g, Level::e, 1e-5, p, ActuatorCalibration::ideal(p.n_max), &diag);
  EXPECT_EQ(diag.inconsistencies, 1);
}

TEST(UpdateActuator, EmissionFromThreeOrFour) {
  PhysicsParams p;
  const double t_e = TargetSpec::make(4, p).t_e;
  const auto out = update_actuator(on({{3, 0.5}, {4, 0.5}}), Level::e, Level::g, t_e, p,
                                   ActuatorCalibration::ideal(p.n_max));
  EXPECT_NEAR(out[4], oracle::emit_from_34_posterior_45[0], 1e-14);
  EXPECT_NEAR(out[5], oracle::emit_from_34_posterior_45[1], 1e-14);
  EXPECT_NEAR(out[3], 0.0, 1e-300);
}

TEST(UpdateActuator, EmissionPastTruncationReflectsAndIsCounted) {
  PhysicsParams p;
  Diagnostics diag;
  const auto d = PhotonDistribution::fock(p.n_max, p.n_max);
  const auto out = update_actuator(d, Level::e, Level::g, 3e-6, p, ActuatorCalibration::ideal(p.n_max), &diag);
  EXPECT_EQ(out[p.n_max], 1.0);
  EXPECT_EQ(diag.reflections, 1);
  EXPECT_GT(diag.reflected_mass, 0.0);
}

TEST(OccupancyPosterior, NoDetectionWeights) {
  PhysicsParams p;
  p.fold_occupancy_tail = false;
  const auto w = occupancy_posterior(0.5, 0, p);
  const double z = oracle::no_detection_weights[0] + oracle::no_detection_weights[1] + oracle::no_detection_weights[2];
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(w[a], oracle::no_detection_weights[a] / z, 1e-15);
  EXPECT_NEAR(w[1] / w[0], 0.375, 1e-15);
  EXPECT_NEAR(w[2] / w[0], 0.0703125, 1e-15);
}

TEST(OccupancyPosterior, PartialDetectionWeights) {
  PhysicsParams p;
  p.fold_occupancy_tail = false;
  const auto w = occupancy_posterior(0.5, 1, p);
  const double z = oracle::partial_weights[0] + oracle::partial_weights[1];
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[1], oracle::partial_weights[0] / z, 1e-15);
  EXPECT_NEAR(w[2], oracle::partial_weights[1] / z, 1e-15);
}

TEST(UpdateNoDetection, SensorsCarryNoInformation) {
  PhysicsParams p;
  std::mt19937_64 rng(3);
  const auto x = random_distribution(p.n_max, rng);
  SampleAnnouncement s;
  s.role = Role::sensor;
  s.phase = 0.4;
  EXPECT_EQ(max_abs_diff(update_no_detection(x, s, p, ActuatorCalibration::ideal(p.n_max)).values(), x.values()), 0.0);
}

TEST(UpdateNoDetection, VanishingControlOccupancyLeavesPrior) {
  PhysicsParams p;
  p.m_control = 1e-12;
  std::mt19937_64 rng(4);
  const auto x = random_distribution(p.n_max, rng);
  const auto out = update_no_detection(x, actuator(Role::emitter, 9e-6), p, ActuatorCalibration::ideal(p.n_max));
  EXPECT_LT(max_abs_diff(out.values(), x.values()), 1e-11);
}

TEST(UpdateNoDetection, PerfectDetectorMeansNoAtom) {
  PhysicsParams p;
  p.eta_d = 1.0;
  std::mt19937_64 rng(5);
  const auto x = random_distribution(p.n_max, rng);
  const auto out = update_no_detection(x, actuator(Role::absorber, 9e-6), p, ActuatorCalibration::ideal(p.n_max));
  EXPECT_LT(max_abs_diff(out.values(), x.values()), 1e-15);
}

TEST(UpdateNoDetection, MixtureOfOccupancyBranches) {
  PhysicsParams p;
  p.fold_occupancy_tail = false;
  const auto calib = ActuatorCalibration::parametric(p.n_max);
  const double t = TargetSpec::make(4, p).t_e;
  std::mt19937_64 rng(6);
  const auto x = random_distribution(p.n_max, rng);
  // Hand mixture: a=0 leaves p, a=1 sums both undetected outcomes, a=2 the
  // four sequential paths, each weighted by Poisson(a) (1-eta)^a.
  const auto prior = occupancy_prior(p.m_control, false);
  const double q = 1 - p.eta_d;
  std::vector<double> acc(p.dim(), 0.0);
  for (int n = 0; n <= p.n_max; ++n) acc[n] += prior[0] * x[n];
  auto step = [&](const std::vector<double>& in, Level k) {
    std::vector<double> out(p.dim(), 0.0);
    for (int m = 0; m <= p.n_max; ++m)
      out[std::min(m + photon_shift(Level::e, k), p.n_max)] +=
          in[m] * actuator_likelihood(Level::e, k, m, t, p, calib);
    return out;
  };
  const std::vector<double> x0(x.values().begin(), x.values().end());
  for (Level k1 : {Level::e, Level::g}) {
    const auto one = step(x0, k1);
    for (int n = 0; n <= p.n_max; ++n) acc[n] += prior[1] * q * one[n];
    for (Level k2 : {Level::e, Level::g}) {
      const auto two = step(one, k2);
      for (int n = 0; n <= p.n_max; ++n) acc[n] += prior[2] * q * q * two[n];
    }
  }
  const auto out = update_no_detection(x, actuator(Role::emitter, t), p, calib);
  EXPECT_LT(max_abs_diff(out.values(), PhotonDistribution(acc).values()), 1e-14);
}

TEST(UpdatePartialDetection, PerfectDetectorReducesToSingleAtom) {
  PhysicsParams p;
  p.eta_d = 1.0;
  const auto calib = ActuatorCalibration::parametric(p.n_max);
  const double t = TargetSpec::make(3, p).t_g;
  std::mt19937_64 rng(8);
  const auto x = random_distribution(p.n_max, rng);
  const auto a = update_partial_detection(x, actuator(Role::absorber, t), Level::e, p, calib);
  const auto b = update_actuator(x, Level::g, Level::e, t, p, calib);
  EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-14);
}

TEST(UpdatePartialDetection, SparseSamplesReduceToSingleAtom) {
  PhysicsParams p;
  p.m_control = 1e-9;
  const auto calib = ActuatorCalibration::parametric(p.n_max);
  const double t = TargetSpec::make(3, p).t_e;
  std::mt19937_64 rng(9);
  const auto x = random_distribution(p.n_max, rng);
  const auto a = update_partial_detection(x, actuator(Role::emitter, t), Level::g, p, calib);
  const auto b = update_actuator(x, Level::e, Level::g, t, p, calib);
  EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-8);
}

TEST(TwoAtomUpdate, TrappedTargetBothSeenExcited) {
  PhysicsParams p;
  const auto ideal = ActuatorCalibration::ideal(p.n_max);
  const auto d = PhotonDistribution::fock(4, p.n_max);
  const auto out = two_atom_update(d, Level::e, Outcomes{Level::e, Level::e}, trapping_time(4, p), p, ideal);
  EXPECT_LT(max_abs_diff(out.values(), d.values()), 1e-12);
}

TEST(TwoAtomUpdate, AbsorbersInVacuum) {
  PhysicsParams p;
  const auto d = PhotonDistribution::fock(0, p.n_max);
  const auto out = two_atom_update(d, Level::g, Outcomes{Level::g, Level::g}, 1.1e-5, p,
                                   ActuatorCalibration::ideal(p.n_max));
  EXPECT_EQ(out[0], 1.0);
}

TEST(TwoAtomUpdate, TwoEmittersFromTwoPhotons) {
  PhysicsParams p;
  p.eta_d = 0.0;  // outcome-averaged: all four paths contribute
  const auto ideal = ActuatorCalibration::ideal(p.n_max);
  const double t = TargetSpec::make(4, p).t_e;
  const auto out = two_atom_update(PhotonDistribution::fock(2, p.n_max), Level::e, Outcomes{}, t, p, ideal);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[2 + i], oracle::two_emitters_from_2[i], 1e-14);
  p.eta_d = 1.0;
  const auto gg = two_atom_update(PhotonDistribution::fock(2, p.n_max), Level::e,
                                  Outcomes{Level::g, Level::g}, t, p, ideal);
  EXPECT_NEAR(gg[4], 1.0, 1e-15);
}

TEST(UpdateRelaxation, ZeroIntervalIsIdentity) {
  PhysicsParams p;
  std::mt19937_64 rng(10);
  const auto x = random_distribution(p.n_max, rng);
  EXPECT_EQ(max_abs_diff(update_relaxation(x, 0.0, p).values(), x.values()), 0.0);
}

TEST(UpdateRelaxation, SinglePhotonDecayAtZeroTemperature) {
  PhysicsParams p;
  p.n_thermal = 0.0;
  const auto out = update_relaxation(PhotonDistribution::fock(1, p.n_max), p.t_sample, p);
  EXPECT_NEAR(out[0], oracle::relax_decay_p0, 1e-10);
}

TEST(UpdateRelaxation, MatchesMatrixExponentialOverOneInterval) {
  PhysicsParams p;
  const auto out = update_relaxation(PhotonDistribution::fock(1, p.n_max), p.t_sample, p);
  for (int n = 0; n < 3; ++n) EXPECT_NEAR(out[n], oracle::relax_delta1_one_interval[n], 1e-10);
}

TEST(UpdateRelaxation, LongTimeReachesThermalMean) {
  PhysicsParams p;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto out = update_relaxation(random_distribution(p.n_max, rng), 100 * p.t_cavity, p);
    EXPECT_NEAR(out.mean(), 0.05, 1e-4);
  }
}

TEST(UpdateRelaxation, ThermalStateIsFixedPoint) {
  PhysicsParams p;
  const auto th = PhotonDistribution::thermal(p.n_thermal, p.n_max);
  for (double dt : {1e-6, p.t_sample, 1e-3, 0.05, 1.0}) {
    const auto out = update_relaxation(th, dt, p);
    EXPECT_LT(max_abs_diff(out.values(), th.values()), 1e-8) << "dt=" << dt;
  }
}

TEST(UpdateRelaxation, ConvergesInTotalVariation) {
  PhysicsParams p;
  const auto th = PhotonDistribution::thermal(p.n_thermal, p.n_max);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto out = update_relaxation(random_distribution(p.n_max, rng), 50 * p.t_cavity, p);
    double tv = 0.0;
    for (int n = 0; n <= p.n_max; ++n) tv += 0.5 * std::abs(out[n] - th[n]);
    EXPECT_LT(tv, 1e-6);
  }
}

TEST(TracePending, EmptyListIsIdentity) {
  PhysicsParams p;
  std::mt19937_64 rng(14);
  const auto x = random_distribution(p.n_max, rng);
  EXPECT_EQ(max_abs_diff(trace_pending(x, {}, p, ActuatorCalibration::ideal(p.n_max)).values(), x.values()), 0.0);
}

TEST(TracePending, TrappedEmitterLeavesTarget) {
  PhysicsParams p;
  const auto d = PhotonDistribution::fock(4, p.n_max);
  const std::vector<SampleAnnouncement> pending{actuator(Role::emitter, trapping_time(4, p))};
  const auto out = trace_pending(d, pending, p, ActuatorCalibration::ideal(p.n_max));
  EXPECT_LT(max_abs_diff(out.values(), d.values()), 1e-12);
}

TEST(TracePending, EmitterFromOneBelowTarget) {
  PhysicsParams p;
  const std::vector<SampleAnnouncement> pending{actuator(Role::emitter, TargetSpec::make(4, p).t_e)};
  const auto out = trace_pending(PhotonDistribution::fock(3, p.n_max), pending, p,
                                 ActuatorCalibration::ideal(p.n_max));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out[3 + i], oracle::pending_emitter_from_3[i], 1e-14);
}

TEST(TracePending, SensorsAndCancelledActuatorsAreTransparent) {
  PhysicsParams p;
  std::mt19937_64 rng(15);
  const auto x = random_distribution(p.n_max, rng);
  SampleAnnouncement s;
  s.role = Role::sensor;
  auto c = actuator(Role::emitter, 9e-6);
  c.resonant = false;
  const std::vector<SampleAnnouncement> pending{s, c, s};
  EXPECT_EQ(max_abs_diff(trace_pending(x, pending, p, ActuatorCalibration::ideal(p.n_max)).values(), x.values()), 0.0);
}

TEST(TransferMatrix, KernelsMatchDirectUpdates) {
  PhysicsParams p;
  const auto calib = ActuatorCalibration::parametric(p.n_max);
  const auto relax = relaxation_matrix(p.t_sample, p);
  const auto ann = actuator(Role::absorber, TargetSpec::make(3, p).t_g);
  const auto kern = averaged_actuator_matrix(ann, p, calib);
  std::mt19937_64 rng(16);
  std::vector<double> out(p.dim());
  for (int i = 0; i < 50; ++i) {
    const auto x = random_distribution(p.n_max, rng);
    relax.apply(x.values(), out);
    EXPECT_LT(max_abs_diff(out, update_relaxation(x, p.t_sample, p).values()), 1e-14);
    kern.apply(x.values(), out);
    EXPECT_LT(max_abs_diff(out, trace_sample(x, ann, p, calib).values()), 1e-14);
  }
}

TEST(Distance, Examples) {
  EXPECT_EQ(distance(PhotonDistribution::fock(4, 12), 4), 0.0);
  EXPECT_EQ(distance(PhotonDistribution::fock(5, 12), 4), 1.0);
  const auto pm = on({{3, 0.5}, {5, 0.5}});
  EXPECT_DOUBLE_EQ(distance(pm, 4), 1.0);
  EXPECT_DOUBLE_EQ(pm.variance(), 1.0);
  EXPECT_DOUBLE_EQ(pm.mean(), 4.0);
}

TEST(Distance, VariancePlusSquaredBias) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_distribution(12, rng);
    const int n_t = static_cast<int>(rng() % 9);
    const double bias = x.mean() - n_t;
    EXPECT_NEAR(distance(x, n_t), x.variance() + bias * bias, 1e-10);
  }
}

// Every public operation keeps the distribution normalized.
TEST(Normalization, RandomizedInputs) {
  PhysicsParams p;
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    p.eta_d = u(rng);
    p.m_control = 2 * u(rng);
    p.fold_occupancy_tail = u(rng) < 0.5;
    const auto calib = ActuatorCalibration::parametric(p.n_max, 0.5 + 0.5 * u(rng), 5 + 20 * u(rng));
    const auto x = random_distribution(p.n_max, rng);
    const Level j = u(rng) < 0.5 ? Level::e : Level::g;
    const Level k = u(rng) < 0.5 ? Level::e : Level::g;
    const double t = 3e-5 * u(rng);
    const auto ann = actuator(u(rng) < 0.5 ? Role::emitter : Role::absorber, t);
    Diagnostics diag;
    for (const auto& out :
         {update_sensor(x, j, 6 * u(rng), p, &diag), update_actuator(x, j, k, t, p, calib, &diag),
          two_atom_update(x, j, Outcomes{k}, t, p, calib, &diag),
          update_no_detection(x, ann, p, calib, &diag),
          update_partial_detection(x, ann, k, p, calib, &diag),
          update_detection(x, ann, Outcomes{j, k}, p, calib, &diag),
          update_relaxation(x, p.t_cavity * u(rng), p), trace_sample(x, ann, p, calib, &diag)})
      worst = std::max(worst, std::abs(total(out) - 1.0));
  }
  EXPECT_LT(worst, 1e-9);
}

// Recursive filter against brute-force enumeration of hidden configurations.
enumeration::Model small_model(const PhysicsParams& p, const ActuatorCalibration& c) {
  enumeration::Model m;
  m.params = p;
  m.contrast = c.contrast;
  m.beta = c.phase;
  m.occupancy_sensor = enumeration::poisson012(p.m_sensor, p.fold_occupancy_tail);
  m.occupancy_control = enumeration::poisson012(p.m_control, p.fold_occupancy_tail);
  return m;
}

struct Script {
  std::vector<enumeration::ScriptedSample> oracle;
  std::vector<SampleAnnouncement> anns;
  std::vector<std::optional<Outcomes>> observed;
};

Script random_script(int length, int trailing_unknown, std::mt19937_64& rng, const PhysicsParams& p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Script s;
  for (int i = 0; i < length; ++i) {
    enumeration::ScriptedSample o;
    SampleAnnouncement a;
    const double r = u(rng);
    if (r < 0.4) {
      o.kind = enumeration::Kind::sensor;
      a.role = Role::sensor;
      o.phase = a.phase = 2 * pi * u(rng);
    } else {
      const bool emit = r < 0.7;
      a.role = emit ? Role::emitter : Role::absorber;
      o.kind = emit ? enumeration::Kind::emitter : enumeration::Kind::absorber;
      o.time = a.interaction_time = 2.5e-5 * u(rng);
      if (u(rng) < 0.15) {
        a.resonant = false;
        o.kind = enumeration::Kind::cancelled;
      }
    }
    std::optional<Outcomes> obs;
    if (i < length - trailing_unknown) {
      Outcomes seen;
      const int count = static_cast<int>(rng() % 3);
      for (int c = 0; c < count; ++c) {
        const Level l = (o.kind == enumeration::Kind::cancelled) ? a.prepared()
                                                                  : (u(rng) < 0.5 ? Level::e : Level::g);
        seen.push_back(l);
      }
      obs = seen;
      std::vector<int> levels;
      for (Level l : seen) levels.push_back(index(l));
      o.detected = levels;
    }
    s.oracle.push_back(o);
    s.anns.push_back(a);
    s.observed.push_back(obs);
  }
  (void)p;
  return s;
}

double enumeration_gap(const PhysicsParams& p, const ActuatorCalibration& calib, int trailing_unknown,
                       int scripts, std::uint64_t seed, int* compared) {
  const auto model = small_model(p, calib);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  *compared = 0;
  for (int s = 0; s < scripts; ++s) {
    const auto prior = random_distribution(p.n_max, rng);
    const Script sc = random_script(6, trailing_unknown, rng, p);
    enumeration::Enumerator en(model, sc.oracle);
    const auto expect = en.posterior(std::vector<double>(prior.values().begin(), prior.values().end()));
    if (expect.empty()) continue;  // script impossible under the prior
    PhotonDistribution filt = prior;
    std::vector<SampleAnnouncement> pending;
    for (std::size_t i = 0; i < sc.anns.size(); ++i) {
      if (sc.observed[i])
        filt = update_detection(filt, sc.anns[i], *sc.observed[i], p, calib);
      else
        pending.push_back(sc.anns[i]);
    }
    filt = trace_pending(filt, pending, p, calib);
    worst = std::max(worst, max_abs_diff(filt.values(), expect));
    ++*compared;
  }
  return worst;
}

PhysicsParams small_params() {
  PhysicsParams p;
  p.n_max = 3;
  return p;
}

TEST(EnumerationOracle, DetectedSequences) {
  PhysicsParams p = small_params();
  auto calib = ActuatorCalibration::parametric(p.n_max, 0.9, 6.0);
  calib.phase = {0.0, 0.05, -0.1, 0.2};
  int compared = 0;
  EXPECT_LT(enumeration_gap(p, calib, 0, 150, 21, &compared), 1e-9);
  EXPECT_GT(compared, 100);
}

TEST(EnumerationOracle, UnfoldedTailAndHighEfficiency) {
  PhysicsParams p = small_params();
  p.fold_occupancy_tail = false;
  p.eta_d = 0.8;
  p.m_control = 1.1;
  int compared = 0;
  EXPECT_LT(enumeration_gap(p, ActuatorCalibration::ideal(p.n_max), 0, 150, 22, &compared), 1e-9);
  EXPECT_GT(compared, 50);
}

TEST(EnumerationOracle, TrailingSamplesTracedOut) {
  PhysicsParams p = small_params();
  int compared = 0;
  EXPECT_LT(enumeration_gap(p, ActuatorCalibration::parametric(p.n_max), 3, 80, 23, &compared), 1e-9);
  EXPECT_GT(compared, 50);
}

}  // namespace
}  // namespace fockfb
