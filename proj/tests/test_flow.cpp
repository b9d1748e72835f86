#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>

#include "doctest.h"
#include "floq/flow.hpp"
#include "floq/potential.hpp"
#include "oracles.hpp"

using floq::AnalyticPotential;
using floq::AnalyticSampler;
using floq::cd;
using floq::FlowConfig;
using floq::PotentialMode;
using floq::TorusField;
using floq::TrigTerm;

namespace {

AnalyticPotential two_cos_x() {
  std::vector<PotentialMode> modes{{1, {TrigTerm{1.0, 0.0, 0.0}}}};
  return AnalyticPotential(std::move(modes), 1.0, 2.0);
}

AnalyticPotential two_cos_x_cos_t(double omega) {
  std::vector<PotentialMode> modes{{1, {TrigTerm{1.0, omega, 0.0}}}};
  return AnalyticPotential(std::move(modes), 1.0, 2.0);
}

}  // namespace

TEST_CASE("free flow carries exact phases") {
  TorusField u0(8);
  u0.set_coeff(2, cd(0.7, -0.1));
  u0.set_coeff(-5, cd(0.0, 0.4));
  FlowConfig cfg;
  cfg.dt = 1.0;  // splitting is exact for V = 0, any dt
  cfg.band = 16;
  cfg.substeps_per_report = 1000;
  auto traj = floq::evolve(u0, nullptr, 0.0, 7.0, cfg);
  const TorusField& ut = traj.states.back();
  for (int j = -16; j <= 16; ++j) {
    cd want = u0.coeff(j) * std::polar(1.0, -static_cast<double>(j) * j * 7.0);
    CHECK(std::abs(ut.coeff(j) - want) < 1e-12);
  }
}

TEST_CASE("x-independent potential only rotates the global phase") {
  // V = v(t): modeled via a k=0 mode
  std::vector<PotentialMode> modes{{0, {TrigTerm{0.5, 0.3, 0.2}}}};
  AnalyticPotential V(std::move(modes), 1.0, 0.5);
  AnalyticSampler sampler(V);
  TorusField u0(6);
  u0.set_coeff(1, cd(0.5, 0.5));
  u0.set_coeff(3, cd(-0.2, 0.1));
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.band = 16;
  cfg.substeps_per_report = 1 << 20;
  auto traj = floq::evolve(u0, &sampler, 0.0, 2.0, cfg);
  const TorusField& ut = traj.states.back();
  for (int j = -16; j <= 16; ++j)
    CHECK(std::abs(std::abs(ut.coeff(j)) - std::abs(u0.coeff(j))) < 1e-10);
}

TEST_CASE("2cos(x) flow matches the dense Magnus oracle") {
  AnalyticPotential V = two_cos_x();
  AnalyticSampler sampler(V);
  TorusField u0(1);
  u0.set_coeff(1, 1.0);
  FlowConfig cfg;
  cfg.dt = 1e-4;
  cfg.band = 32;
  cfg.substeps_per_report = 1 << 20;
  auto traj = floq::evolve(u0, &sampler, 0.0, 0.1, cfg);
  TorusField ref = oracle::magnus_evolve(u0, &sampler, 32, 0.0, 0.1, 1e-6);
  CHECK(oracle::l2_distance(traj.states.back(), ref) < 1e-8);
}

TEST_CASE("time-dependent potential matches the oracle on |t| <= 1") {
  AnalyticPotential V = two_cos_x_cos_t(0.7);
  AnalyticSampler sampler(V);
  TorusField u0 = floq::random_probe(8, 1.0, 3);
  FlowConfig cfg;
  cfg.dt = 2e-4;
  cfg.band = 32;
  cfg.substeps_per_report = 1 << 20;
  auto traj = floq::evolve(u0, &sampler, 0.0, 1.0, cfg);
  TorusField ref = oracle::magnus_evolve(u0, &sampler, 32, 0.0, 1.0, 2e-6);
  CHECK(oracle::l2_distance(traj.states.back(), ref) < 1e-7);
}

TEST_CASE("unitarity over 1e4 steps") {
  AnalyticPotential V = two_cos_x_cos_t(0.5);
  AnalyticSampler sampler(V);
  TorusField u0 = floq::random_probe(32, 1.0, 4);
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.band = 64;
  floq::Stepper st(u0, &sampler, 0.0, cfg);
  double l2_0 = st.l2();
  st.advance(10000);
  CHECK(std::abs(st.l2() - l2_0) <= 1e-9 * l2_0);
}

TEST_CASE("Strang splitting converges at order 2") {
  AnalyticPotential V = two_cos_x_cos_t(0.9);
  AnalyticSampler sampler(V);
  TorusField u0 = floq::random_probe(8, 1.0, 5);
  auto run = [&](double dt) {
    FlowConfig cfg;
    cfg.dt = dt;
    cfg.band = 32;
    cfg.substeps_per_report = 1 << 20;
    return floq::evolve(u0, &sampler, 0.0, 1.0, cfg).states.back();
  };
  TorusField ref = run(1.0 / 2048.0);
  double e1 = oracle::l2_distance(run(1.0 / 64.0), ref);
  double e2 = oracle::l2_distance(run(1.0 / 128.0), ref);
  double ratio = e1 / e2;
  CHECK(ratio > 4.0 * 0.8);
  CHECK(ratio < 4.0 * 1.2);
}

TEST_CASE("time reversal returns the initial state") {
  AnalyticPotential V = two_cos_x_cos_t(0.6);
  AnalyticSampler sampler(V);
  TorusField u0 = floq::random_probe(16, 1.0, 6);
  FlowConfig cfg;
  cfg.dt = 1e-3;
  cfg.band = 48;
  cfg.substeps_per_report = 1 << 20;
  auto fwd = floq::evolve(u0, &sampler, 0.0, 2.0, cfg);
  auto bwd = floq::evolve(fwd.states.back(), &sampler, 2.0, 0.0, cfg);
  CHECK(oracle::l2_distance(bwd.states.back(), u0) < 1e-8);
}

TEST_CASE("evolve rejects a non-multiple time span") {
  TorusField u0(2);
  u0.set_coeff(1, 1.0);
  FlowConfig cfg;
  cfg.dt = 0.3;
  cfg.band = 8;
  CHECK_THROWS_AS(floq::evolve(u0, nullptr, 0.0, 1.0, cfg),
                  std::invalid_argument);
}

TEST_CASE("defect bound: exact trajectory sits at the noise floor") {
  AnalyticPotential V = two_cos_x();
  AnalyticSampler sampler(V);
  TorusField u0(1);
  u0.set_coeff(1, 1.0);
  FlowConfig cfg;
  cfg.dt = 1e-4;
  cfg.band = 32;
  cfg.substeps_per_report = 1;
  auto traj = floq::evolve(u0, &sampler, 0.0, 0.02, cfg);
  auto db = floq::defect_bound(traj, &sampler);
  CHECK(db.eta_sup < 1e-4);
  CHECK(db.l2_bound <= db.eta_sup * 0.02 * (1 + 1e-12));
}

TEST_CASE("defect bound: frozen mode has eta = ||Delta u0|| = 1") {
  TorusField u0(4);
  u0.set_coeff(1, 1.0);
  floq::Trajectory traj;
  for (int i = 0; i <= 10; ++i) {
    traj.times.push_back(0.01 * i);
    traj.states.push_back(u0);
  }
  traj.l2_initial = 1.0;
  auto db = floq::defect_bound(traj, nullptr);
  CHECK(db.eta_sup == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(db.l2_bound == doctest::Approx(0.1).epsilon(1e-12));

  floq::Trajectory sparse;
  sparse.times = {0.0, 1.0};
  sparse.states = {u0, u0};
  CHECK_THROWS_AS(floq::defect_bound(sparse, nullptr), std::invalid_argument);
}

TEST_CASE("measured flow norm is 1 for V = 0 and x-independent V") {
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.band = 32;
  for (double s : {0.0, 1.0, 2.0}) {
    double nrm = floq::measure_flow_norm(nullptr, s, 1.0, cfg, 11, 5);
    CHECK(nrm == doctest::Approx(1.0).epsilon(1e-8));
  }
  std::vector<PotentialMode> modes{{0, {TrigTerm{0.5, 0.3, 0.0}}}};
  AnalyticPotential V(std::move(modes), 1.0, 0.5);
  AnalyticSampler sampler(V);
  double nrm = floq::measure_flow_norm(&sampler, 1.0, 1.0, cfg, 11, 3);
  CHECK(nrm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("commutator norm structure") {
  AnalyticPotential V = two_cos_x();
  AnalyticSampler sampler(V);
  // x-independent V commutes with every multiplier
  std::vector<PotentialMode> flat{{0, {TrigTerm{0.7, 0.2, 0.0}}}};
  AnalyticPotential Vflat(std::move(flat), 1.0, 0.7);
  AnalyticSampler sflat(Vflat);
  CHECK(floq::commutator_norm(&sflat, 0.3, 16, 1.0, 64) < 1e-14);
  // 1/J law: the norm halves (within factor 1.5) per doubling of J
  double prev = -1.0;
  for (int J : {16, 32, 64}) {
    double v = floq::commutator_norm(&sampler, 0.0, J, 0.0, 160);
    CHECK(v > 0.0);
    if (prev > 0.0) {
      CHECK(prev / v > 2.0 / 1.5);
      CHECK(prev / v < 2.0 * 1.5);
    }
    prev = v;
  }
  CHECK_THROWS_AS(floq::commutator_norm(&sampler, 0.0, 64, 0.0, 32),
                  std::invalid_argument);
}

TEST_CASE("tail persistence small cases") {
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.band = 64;
  // V = 0, u0 inside |j| <= J/2: free flow preserves support, tail ratio 0
  TorusField u0(8);
  u0.set_coeff(3, 1.0);
  auto tp = floq::tail_persistence(u0, nullptr, 32, 1.0, 2.0, cfg);
  CHECK(tp.ratio == 0.0);
  CHECK(tp.regime_ok);
  // t = 0: the multiplier is a contraction
  AnalyticPotential V = two_cos_x();
  AnalyticSampler sampler(V);
  TorusField probe = floq::random_probe(32, 1.0, 7);
  auto tp0 = floq::tail_persistence(probe, &sampler, 16, 1.0, 0.0, cfg);
  CHECK(tp0.ratio <= 1.0 + 1e-12);
  // regime flag trips when J <= |t|^s
  auto tpr = floq::tail_persistence(u0, nullptr, 4, 2.0, 3.0, cfg);
  CHECK_FALSE(tpr.regime_ok);
}

TEST_CASE("flow commutator small cases") {
  FlowConfig cfg;
  cfg.dt = 1e-2;
  cfg.band = 64;
  TorusField u0 = floq::random_probe(24, 1.0, 8);
  // V = 0: free flow commutes with multipliers
  CHECK(floq::flow_commutator(u0, nullptr, 16, 1.0, 2.0, cfg) < 1e-12);
  // t = 0: S(0) = I
  AnalyticPotential V = two_cos_x();
  AnalyticSampler sampler(V);
  CHECK(floq::flow_commutator(u0, &sampler, 16, 1.0, 0.0, cfg) < 1e-12);
}

TEST_CASE("stepper input validation") {
  TorusField u0(2);
  u0.set_coeff(1, 1.0);
  FlowConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(floq::Stepper(u0, nullptr, 0.0, bad), std::invalid_argument);
  FlowConfig wrong_scheme;
  wrong_scheme.scheme = 4;
  CHECK_THROWS_AS(floq::Stepper(u0, nullptr, 0.0, wrong_scheme),
                  std::invalid_argument);
  TorusField wide(40);
  wide.set_coeff(40, 1.0);
  FlowConfig narrow;
  narrow.band = 8;
  CHECK_THROWS_AS(floq::Stepper(wide, nullptr, 0.0, narrow),
                  std::invalid_argument);
}
