// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 5 and 6 share one desk-scale eigensolve (T = 16,
// |j| <= 64), which dominates the runtime.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "floq/floquet.hpp"
#include "floq/flow.hpp"
#include "floq/growth.hpp"
#include "floq/params.hpp"
#include "floq/potential.hpp"
#include "floq/torus_field.hpp"
#include "oracles.hpp"

using floq::cd;
using floq::TorusField;

namespace {

constexpr double kPi = std::numbers::pi;

struct Gate {
  int failures = 0;
  void run(int index, const std::string& what,
           const std::function<void(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      body(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (!ok) ++failures;
    std::printf("criterion %d: %s — %s (%.1fs)%s%s\n", index,
                ok ? "PASS" : "FAIL", what.c_str(), secs,
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
  }
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Desk-scale fixture shared by criteria 5 and 6.
struct DeskFixture {
  floq::ParamPack pack;  // default: alpha 1.1, delta 0.2, sigma' 2.5, sigma 3
  double T = 16.0;
  std::unique_ptr<floq::AnalyticPotential> pot;
  std::unique_ptr<floq::TruncatedPotential> v2;
  std::unique_ptr<floq::Lattice> lat;
  std::unique_ptr<floq::FloquetOperator> H;
  std::unique_ptr<floq::Spectrum> spec;

  void build() {
    if (spec) return;
    pot = std::make_unique<floq::AnalyticPotential>(
        floq::builtin_potential("analytic3"));
    floq::GevreyCutoff cutoff(pack.alpha);
    double lg = floq::log_scale(T);
    int k_x = static_cast<int>(std::ceil(std::pow(lg, pack.sigma)));
    int k_t = static_cast<int>(std::ceil(T * std::pow(lg, pack.sigma)));
    floq::PeriodizedPotential v1 =
        floq::periodize(*pot, T, cutoff, std::max(k_x, pot->max_k() + 1),
                        k_t + 112, 1e-8);
    v2 = std::make_unique<floq::TruncatedPotential>(
        floq::truncate(v1, pack.sigma, pack.delta));
    lat = std::make_unique<floq::Lattice>(
        floq::Lattice::make(T, 64, pack.A, pack.sigma));
    H = std::make_unique<floq::FloquetOperator>(floq::assemble(*v2, *lat));
    spec = std::make_unique<floq::Spectrum>(floq::eigensolve(*H));
  }
};

DeskFixture g_desk;

}  // namespace

int main() {
  Gate gate;

  gate.run(1, "unitarity over 1e4 steps per scenario", [](std::string& d) {
    std::vector<std::string> scenarios{"zero", "analytic3", "periodic3",
                                       "random-refresh"};
    double worst = 0.0;
    for (const auto& name : scenarios) {
      floq::ExperimentConfig cfg;
      cfg.scenario = name;
      cfg.seed = 5;
      floq::SamplerBundle bundle = floq::make_sampler(cfg);
      TorusField u0 = floq::random_probe(32, 1.0, 11);
      floq::FlowConfig fcfg;
      fcfg.dt = 0.01;
      fcfg.band = 64;
      floq::Stepper st(u0, bundle.sampler.get(), 0.0, fcfg);
      double l2_0 = st.l2();
      st.advance(10000);
      double drift = std::abs(st.l2() - l2_0) / l2_0;
      worst = std::max(worst, drift);
      require(drift <= 1e-9,
              name + ": relative L2 drift " + fmt(drift) + " > 1e-9");
    }
    d = "max relative drift " + fmt(worst);
  });

  gate.run(2, "free-flow phase exactness at t = 100", [](std::string& d) {
    TorusField u0(8);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = -8; j <= 8; ++j) u0.set_coeff(j, cd(gauss(rng), gauss(rng)));
    floq::FlowConfig cfg;
    cfg.dt = 0.5;
    cfg.band = 16;
    cfg.substeps_per_report = 1 << 20;
    auto traj = floq::evolve(u0, nullptr, 0.0, 100.0, cfg);
    double worst = 0.0;
    for (int j = -8; j <= 8; ++j) {
      cd want =
          u0.coeff(j) * std::polar(1.0, -static_cast<double>(j) * j * 100.0);
      worst = std::max(worst, std::abs(traj.states.back().coeff(j) - want));
    }
    require(worst <= 1e-12, "max per-mode error " + fmt(worst) + " > 1e-12");
    d = "max per-mode error " + fmt(worst);
  });

  gate.run(3, "integrator vs dense Magnus oracle (band 65, t = 1)",
           [](std::string& d) {
    floq::AnalyticPotential V = floq::builtin_potential("analytic3");
    floq::AnalyticSampler sampler(V);
    TorusField u0 = floq::random_probe(12, 1.0, 7);
    floq::FlowConfig cfg;
    cfg.dt = 2e-4;
    cfg.band = 32;
    cfg.substeps_per_report = 1 << 20;
    auto traj = floq::evolve(u0, &sampler, 0.0, 1.0, cfg);
    TorusField ref = oracle::magnus_evolve(u0, &sampler, 32, 0.0, 1.0, 1e-4);
    double dist = oracle::l2_distance(traj.states.back(), ref);
    require(dist <= 1e-7, "L2 distance " + fmt(dist) + " > 1e-7");
    d = "L2 distance " + fmt(dist);
  });

  gate.run(4, "Floquet assembly and small eigensolve vs dense oracle",
           [](std::string& d) {
    // 5x5 toy lattice, 2-mode kernel, entry-for-entry
    floq::Lattice toy{6.0, 2, 2, 2.0, 3.0};
    floq::SpaceTimeField ker(1, 1, 6.0);
    ker.set_coeff(1, 0, 0.2);
    ker.set_coeff(-1, 0, 0.2);
    ker.set_coeff(0, 1, 0.1);
    ker.set_coeff(0, -1, 0.1);
    floq::FloquetOperator H(ker, toy);
    Eigen::MatrixXcd M = oracle::dense_floquet(ker, toy);
    for (int j = -2; j <= 2; ++j)
      for (int n = -2; n <= 2; ++n)
        for (int jp = -2; jp <= 2; ++jp)
          for (int np = -2; np <= 2; ++np)
            require(H.entry(j, n, jp, np) ==
                        M(toy.index(j, n), toy.index(jp, np)),
                    "assembled entry mismatch vs brute force");
    // small eigensolve to 1e-10
    floq::Lattice small{6.0, 3, 4, 2.0, 3.0};
    floq::FloquetOperator Hs(ker, small);
    floq::Spectrum spec = floq::eigensolve(Hs);
    Eigen::MatrixXcd Ms = oracle::dense_floquet(ker, small);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ms);
    double worst = 0.0;
    for (int k = 0; k < spec.count(); ++k)
      worst = std::max(worst,
                       std::abs(spec.eigenvalue(k) - es.eigenvalues()[k]));
    require(worst <= 1e-10, "eigenvalue mismatch " + fmt(worst) + " > 1e-10");
    d = "max eigenvalue mismatch " + fmt(worst);
  });

  gate.run(5, "desk-scale Floquet reconstruction vs direct integration",
           [](std::string& d) {
    g_desk.build();
    TorusField u0 = floq::default_datum(32, 1.0);
    floq::TableSampler sampler(g_desk.v2->table());
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, -8.0, -16.0}) {
      floq::FlowConfig cfg;
      cfg.dt = 0.002;
      cfg.band = 64;
      cfg.substeps_per_report = 1 << 24;
      auto traj = floq::evolve(u0, &sampler, 0.0, t, cfg);
      auto rec = floq::reconstruct_flow(u0, *g_desk.spec, t);
      require(rec.complete, "expansion lost mass at t=" + fmt(t));
      double dist = oracle::l2_distance(rec.state, traj.states.back());
      worst = std::max(worst, dist);
      require(dist <= 1e-4, "L2 distance " + fmt(dist) + " > 1e-4 at t=" +
                                fmt(t));
    }
    d = "max L2 distance " + fmt(worst) + " over |t| <= 16";
  });

  gate.run(6, "desk-scale localization dichotomy and resonance separation",
           [](std::string& d) {
    g_desk.build();
    auto rep = floq::localization_report(*g_desk.spec, *g_desk.lat,
                                         g_desk.pack.sigma, 1e-2);
    require(rep.n_fail == 0, std::to_string(rep.n_fail) +
                                 " eigenvectors fail the dichotomy at 1e-2");
    double lg = floq::log_scale(g_desk.T);
    double floor_E = 5.0 * g_desk.pack.A * g_desk.pack.A *
                     std::pow(lg, 2.0 * g_desk.pack.sigma);
    double thr = std::pow(lg, g_desk.pack.sigma);
    int checked = 0;
    for (const auto& e : rep.entries) {
      if (e.E <= floor_E) continue;
      auto sites = floq::resonant_set(e.E, *g_desk.lat, thr);
      if (sites.empty()) continue;
      ++checked;
      int shell = std::abs(sites.front().first);
      for (const auto& [j, n] : sites)
        require(std::abs(j) == shell,
                "resonant set at E=" + fmt(e.E) + " spans |j| shells");
    }
    d = std::to_string(rep.entries.size()) + " pairs, 0 dichotomy failures, " +
        std::to_string(checked) + " resonant sets single-shell";
  });

  gate.run(7, "commutator and tail-persistence 1/J scaling laws", [](std::string& d) {
    floq::AnalyticPotential V = floq::builtin_potential("analytic3");
    floq::AnalyticSampler sampler(V);
    const double s = 1.0, t = 4.0;
    floq::FlowConfig cfg;
    cfg.dt = 0.002;
    cfg.band = 256;
    // commutator norm halves per doubling across {16, 32, 64, 128}
    double prev = -1.0;
    for (int J : {16, 32, 64, 128}) {
      double v = floq::commutator_norm(&sampler, 0.0, J, s, cfg.band);
      if (prev > 0.0) {
        double ratio = prev / v;
        require(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5,
                "commutator ratio " + fmt(ratio) + " outside [1.33, 3] at J=" +
                    std::to_string(J));
      }
      prev = v;
    }
    // tail persistence: probes carrying genuine tail mass in (J, 2J]
    auto tail_probe = [&](int J, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      TorusField u(2 * J);
      for (int a = J + 1; a <= 2 * J; ++a) {
        u.set_coeff(a, cd(gauss(rng), gauss(rng)));
        u.set_coeff(-a, cd(gauss(rng), gauss(rng)));
      }
      double nrm = floq::hs_norm(u, s);
      for (int j = -2 * J; j <= 2 * J; ++j) u.set_coeff(j, u.coeff(j) / nrm);
      return u;
    };
    double tp64 = 0.0, tp128 = 0.0;
    for (std::uint64_t p = 0; p < 5; ++p) {
      tp64 = std::max(
          tp64,
          floq::tail_persistence(tail_probe(64, 31 + p), &sampler, 64, s, t,
                                 cfg).ratio - 1.0);
      tp128 = std::max(
          tp128,
          floq::tail_persistence(tail_probe(128, 31 + p), &sampler, 128, s, t,
                                 cfg).ratio - 1.0);
    }
    require(tp64 > 0.0 && tp128 > 0.0,
            "tail persistence excess not positive (J=64: " + fmt(tp64) +
                ", J=128: " + fmt(tp128) + ")");
    require(tp64 / tp128 >= 1.5, "tail persistence ratio " +
                                     fmt(tp64 / tp128) + " < 1.5 per doubling");
    // flow commutator decreases >= 1.5x per doubling
    TorusField probe = floq::random_probe(128, s, 1);
    double fc64 = floq::flow_commutator(probe, &sampler, 64, s, t, cfg);
    double fc128 = floq::flow_commutator(probe, &sampler, 128, s, t, cfg);
    require(fc64 / fc128 >= 1.5, "flow commutator ratio " +
                                     fmt(fc64 / fc128) + " < 1.5 per doubling");
    d = "tail excess ratio " + fmt(tp64 / tp128) + ", flow commutator ratio " +
        fmt(fc64 / fc128);
  });

  gate.run(8, "interpolation and tail inequalities on 1000 random fields",
           [](std::string& d) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      int band = 1 + static_cast<int>(rng() % 32);
      TorusField u(band);
      for (int j = -band; j <= band; ++j)
        u.set_coeff(j, cd(gauss(rng), gauss(rng)));
      int s = 1 + static_cast<int>(rng() % 6);
      int gamma = static_cast<int>(rng() % (s + 1));
      // interpolation (Eq 3.9)
      double lhs = floq::hs_norm(u, s - gamma);
      double rhs = std::pow(floq::hs_norm(u, s), double(s - gamma) / s) *
                   std::pow(floq::hs_norm(u, 0.0), double(gamma) / s);
      require(lhs <= rhs * (1 + 1e-10), "interpolation inequality violated");
      // tail bound (Eq 3.20)
      int J = 2 * (1 + static_cast<int>(rng() % 16));
      floq::MultiplierProfile prof{J};
      TorusField tail(band);
      for (int j = -band; j <= band; ++j)
        tail.set_coeff(j, u.coeff(j) * (1.0 - prof.value(j)));
      require(floq::hs_norm(tail, s - gamma) <=
                  std::pow(2.0 / J, gamma) * floq::hs_norm(u, s) * (1 + 1e-12),
              "tail bound violated");
      ++checked;
    }
    d = std::to_string(checked) + " fields, 0 violations";
  });

  gate.run(9, "growth tail behavior and fit recovery", [](std::string& d) {
    // synthetic generator recovery within 1%
    std::vector<double> times, norms;
    for (int i = 0; i < 64; ++i) {
      times.push_back(std::pow(10.0, 0.1 * i));
      norms.push_back(std::pow(std::log(times.back() + 2.0), 3.0));
    }
    auto sfit = floq::fit_log_exponent(times, norms, 1.0);
    require(std::abs(sfit.varsigma - 3.0) <= 0.03,
            "synthetic fit " + fmt(sfit.varsigma) + " off 3.0 by > 1%");

    // analytic quasi-periodic scenario to t = 1e4
    floq::ExperimentConfig cfg;
    cfg.scenario = "analytic3";
    cfg.label = "desk";
    cfg.s_list = {1.0};
    cfg.t_final = 1e4;
    cfg.dt = 0.01;
    cfg.band = 128;
    cfg.T = 16.0;
    cfg.J = 64;
    auto rec = floq::run_growth(cfg);
    // log-scaled dyadic tail non-increasing after its max, 5% slack
    std::vector<double> scaled;
    for (size_t i = 0; i < rec.times.size(); ++i)
      scaled.push_back(rec.norms[0][i] /
                       std::pow(std::log(rec.times[i] + 2.0), 4.0));
    size_t lo = scaled.size() / 2;
    size_t argmax = lo;
    for (size_t i = lo; i < scaled.size(); ++i)
      if (scaled[i] > scaled[argmax]) argmax = i;
    for (size_t i = argmax; i + 1 < scaled.size(); ++i)
      require(scaled[i + 1] <= scaled[i] * 1.05,
              "log-scaled tail rises > 5% after its max (t=" +
                  fmt(rec.times[i + 1]) + ")");

    // periodic ([W]-style) scenario verdict: bounded
    floq::ExperimentConfig per = cfg;
    per.scenario = "periodic3";
    per.label = "periodic";
    auto rows = floq::scenario_compare({per});
    require(!rows[0].failed, "periodic scenario failed: " + rows[0].error);
    require(rows[0].bounded, "periodic scenario not bounded (tail score " +
                                 fmt(rows[0].tail_score) + ")");
    d = "varsigma_hat(analytic3) = " + fmt(rec.fits[0].varsigma) +
        ", periodic tail score " + fmt(rows[0].tail_score);
  });

  gate.run(10, "determinism of seeded CSV output", [](std::string& d) {
    floq::ExperimentConfig cfg;
    cfg.scenario = "random-refresh";
    cfg.label = "det";
    cfg.s_list = {1.0};
    cfg.t_final = 32.0;
    cfg.dt = 0.02;
    cfg.band = 64;
    cfg.T = 8.0;
    cfg.J = 16;
    cfg.seed = 42;
    std::ostringstream a, b;
    floq::write_growth_csv(floq::run_growth(cfg), a);
    floq::write_growth_csv(floq::run_growth(cfg), b);
    require(a.str() == b.str(), "repeated runs differ byte-wise");
    require(!a.str().empty(), "empty CSV");
    d = "bit-identical CSVs (" + std::to_string(a.str().size()) + " bytes)";
  });

  if (gate.failures == 0) {
    std::printf("acceptance: all 10 criteria PASS\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", gate.failures);
  return 1;
}
