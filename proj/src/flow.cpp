#include "floq/flow.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "floq/errors.hpp"
#include "floq/fft.hpp"

namespace floq {

namespace {
constexpr double kPi = std::numbers::pi;
}

void AnalyticSampler::sample_grid(double t, std::span<double> v) const {
  const int n = static_cast<int>(v.size());
  for (double& x : v) x = 0.0;
  for (const auto& m : V_->modes()) {
    double a = m.eval(t);
    if (a == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      double x = -kPi + 2.0 * kPi * i / n;
      v[i] += a * std::cos(m.k * x);
    }
  }
}

cd AnalyticSampler::x_coeff(int k, double t) const {
  return cd(V_->time_coeff(k, t), 0.0);
}

void TableSampler::sample_grid(double t, std::span<double> v) const {
  const int n = static_cast<int>(v.size());
  const int jb = table_->j_max();
  // a_j(t) = sum_n c(j,n) e^{i n t / T}, then synthesize over the x grid.
  std::vector<cd> aj(2 * jb + 1);
  for (int j = -jb; j <= jb; ++j) aj[j + jb] = x_coeff(j, t);
  for (int i = 0; i < n; ++i) {
    double x = -kPi + 2.0 * kPi * i / n;
    cd acc = aj[jb];
    for (int j = 1; j <= jb; ++j) {
      cd e = std::polar(1.0, j * x);
      acc += aj[j + jb] * e + aj[-j + jb] * std::conj(e);
    }
    v[i] = acc.real();
  }
}

cd TableSampler::x_coeff(int k, double t) const {
  if (std::abs(k) > table_->j_max()) return cd(0.0, 0.0);
  const double T = table_->period_scale();
  cd acc(0.0, 0.0);
  for (int n = -table_->n_max(); n <= table_->n_max(); ++n) {
    cd c = table_->coeff(k, n);
    if (c != cd(0.0, 0.0)) acc += c * std::polar(1.0, n * t / T);
  }
  return acc;
}

Stepper::Stepper(const TorusField& u0, const PotentialSampler* V, double t0,
                 const FlowConfig& config)
    : V_(V), dt_(config.dt), t_(t0) {
  if (config.dt == 0.0) throw std::invalid_argument("Stepper: dt must be nonzero");
  if (config.scheme != 2)
    throw std::invalid_argument("Stepper: only the order-2 Strang scheme is built");
  n_ = fft::next_pow2(2 * (config.band + 1));
  if (u0.j_max() > n_ / 2 - 1) {
    for (int j = -u0.j_max(); j <= u0.j_max(); ++j)
      if (std::abs(j) > n_ / 2 - 1 && u0.coeff(j) != cd(0.0, 0.0))
        throw std::invalid_argument("Stepper: u0 exceeds the configured band");
  }
  spec_.assign(n_, cd(0.0, 0.0));
  // The (-1)^j twiddle places the physical grid at x = -pi + 2*pi*m/n,
  // matching the convention of PotentialSampler::sample_grid.
  for (int j = -std::min(u0.j_max(), n_ / 2 - 1);
       j <= std::min(u0.j_max(), n_ / 2 - 1); ++j) {
    int k = j >= 0 ? j : j + n_;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    spec_[k] = u0.coeff(j) * sign;
  }
  kin_half_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    double j = static_cast<double>(fft::bin_freq(k, n_));
    kin_half_[k] = std::polar(1.0, -0.5 * j * j * dt_);
  }
  vgrid_.assign(n_, 0.0);
}

void Stepper::step() {
  for (int k = 0; k < n_; ++k) spec_[k] *= kin_half_[k];
  if (V_ != nullptr) {
    fft::inverse(spec_);
    V_->sample_grid(t_ + 0.5 * dt_, vgrid_);
    for (int k = 0; k < n_; ++k) spec_[k] *= std::polar(1.0, -vgrid_[k] * dt_);
    fft::forward(spec_);
  }
  for (int k = 0; k < n_; ++k) spec_[k] *= kin_half_[k];
  t_ += dt_;
}

void Stepper::advance(int nsteps) {
  for (int i = 0; i < nsteps; ++i) step();
}

double Stepper::l2() const {
  double acc = 0.0;
  for (const auto& v : spec_) acc += std::norm(v);
  return std::sqrt(acc);
}

TorusField Stepper::state() const {
  TorusField out(n_ / 2 - 1);
  for (int j = -out.j_max(); j <= out.j_max(); ++j) {
    int k = j >= 0 ? j : j + n_;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out.set_coeff(j, spec_[k] * sign);
  }
  return out;
}

Trajectory evolve(const TorusField& u0, const PotentialSampler* V, double t0,
                  double t1, const FlowConfig& config) {
  FlowConfig cfg = config;
  cfg.dt = (t1 >= t0) ? std::abs(config.dt) : -std::abs(config.dt);
  long nsteps = std::lround((t1 - t0) / cfg.dt);
  if (std::abs(t0 + nsteps * cfg.dt - t1) > 1e-9 * (1.0 + std::abs(t1)))
    throw std::invalid_argument("evolve: (t1 - t0) must be a multiple of dt");

  Stepper st(u0, V, t0, cfg);
  Trajectory traj;
  traj.l2_initial = st.l2();
  traj.times.push_back(st.time());
  traj.states.push_back(st.state());
  const int chunk = std::max(1, config.substeps_per_report);
  long done = 0;
  while (done < nsteps) {
    int todo = static_cast<int>(std::min<long>(chunk, nsteps - done));
    st.advance(todo);
    done += todo;
    traj.times.push_back(st.time());
    traj.states.push_back(st.state());
    double drift = std::abs(st.l2() - traj.l2_initial);
    if (drift > 1e-6 * traj.l2_initial)
      throw InvariantViolation("evolve: L2 drift " + std::to_string(drift) +
                               " at t=" + std::to_string(st.time()) +
                               " exceeds stability budget");
  }
  return traj;
}

DefectBound defect_bound(const Trajectory& traj, const PotentialSampler* V) {
  if (traj.times.size() < 3)
    throw std::invalid_argument(
        "defect_bound: trajectory too sparse for the differencing stencil");
  const double h = traj.times[1] - traj.times[0];
  for (size_t i = 1; i + 1 < traj.times.size(); ++i) {
    double hh = traj.times[i + 1] - traj.times[i];
    if (std::abs(hh - h) > 1e-9 * std::abs(h))
      throw std::invalid_argument("defect_bound: nonuniform trajectory spacing");
  }

  DefectBound out;
  double tmax = 0.0;
  const int jb = traj.states[0].j_max();
  const int n = fft::next_pow2(2 * (jb + 1));
  std::vector<double> vgrid(n, 0.0);
  for (size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const auto& um = traj.states[i - 1];
    const auto& u0 = traj.states[i];
    const auto& up = traj.states[i + 1];
    // eta = i du/dt + Delta u - V u, assembled spectrally
    TorusField eta(jb);
    for (int j = -jb; j <= jb; ++j) {
      cd dudt = (up.coeff(j) - um.coeff(j)) / (2.0 * h);
      eta.set_coeff(j, cd(0.0, 1.0) * dudt -
                           static_cast<double>(j) * j * u0.coeff(j));
    }
    if (V != nullptr) {
      V->sample_grid(traj.times[i], vgrid);
      std::vector<cd> g = u0.to_grid(n);
      for (int k = 0; k < n; ++k) g[k] *= vgrid[k];
      TorusField vu = TorusField::from_grid(g);
      for (int j = -jb; j <= jb; ++j)
        eta.set_coeff(j, eta.coeff(j) - vu.coeff(j));
    }
    out.eta_sup = std::max(out.eta_sup, l2_norm(eta));
    tmax = std::max(tmax, std::abs(traj.times[i]));
  }
  tmax = std::max(tmax, std::abs(traj.times.back()));
  out.l2_bound = out.eta_sup * tmax;
  return out;
}

TorusField random_probe(int band, double s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TorusField u(band);
  for (int j = -band; j <= band; ++j) {
    double w = std::pow(1.0 + static_cast<double>(j) * j, -(s + 1.0) / 2.0);
    u.set_coeff(j, w * cd(gauss(rng), gauss(rng)));
  }
  double nrm = hs_norm(u, s);
  for (int j = -band; j <= band; ++j) u.set_coeff(j, u.coeff(j) / nrm);
  return u;
}

double measure_flow_norm(const PotentialSampler* V, double s, double t,
                         const FlowConfig& config, std::uint64_t seed,
                         int probes) {
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    TorusField u0 = random_probe(config.band / 2, s, seed + 7919 * p);
    FlowConfig cfg = config;
    cfg.substeps_per_report = 1 << 28;
    Trajectory traj = evolve(u0, V, 0.0, t, cfg);
    best = std::max(best, hs_norm(traj.states.back(), s));
  }
  return best;
}

double commutator_norm(const PotentialSampler* V, double t, int J, double s,
                       int band) {
  if (J > band)
    throw std::invalid_argument("commutator_norm: J must lie within the band");
  const int n = 2 * band + 1;
  MultiplierProfile prof{J};
  Eigen::MatrixXcd M(n, n);
  for (int j = -band; j <= band; ++j)
    for (int jp = -band; jp <= band; ++jp) {
      cd vhat = V ? V->x_coeff(j - jp, t) : cd(0.0, 0.0);
      double wj = std::pow(1.0 + static_cast<double>(j) * j, s / 2.0);
      double wjp = std::pow(1.0 + static_cast<double>(jp) * jp, s / 2.0);
      M(j + band, jp + band) =
          vhat * (prof.value(jp) - prof.value(j)) * (wj / wjp);
    }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

TailPersistence tail_persistence(const TorusField& u0, const PotentialSampler* V,
                                 int J, double s, double t,
                                 const FlowConfig& config) {
  TailPersistence out;
  out.regime_ok = static_cast<double>(J) > std::pow(std::abs(t), s);
  FlowConfig cfg = config;
  cfg.substeps_per_report = 1 << 28;
  Trajectory traj = evolve(u0, V, 0.0, t, cfg);
  const TorusField& ut = traj.states.back();
  TorusField tail(ut.j_max());
  MultiplierProfile prof{J};
  for (int j = -ut.j_max(); j <= ut.j_max(); ++j)
    tail.set_coeff(j, ut.coeff(j) * (1.0 - prof.value(j)));
  out.ratio = hs_norm(tail, s) / hs_norm(u0, s);
  return out;
}

double flow_commutator(const TorusField& u0, const PotentialSampler* V, int J,
                       double s, double t, const FlowConfig& config) {
  FlowConfig cfg = config;
  cfg.substeps_per_report = 1 << 28;
  TorusField pu0 = apply_multiplier(u0, J);
  Trajectory a = evolve(pu0, V, 0.0, t, cfg);
  Trajectory b = evolve(u0, V, 0.0, t, cfg);
  TorusField pb = apply_multiplier(b.states.back(), J);
  const TorusField& sa = a.states.back();
  TorusField diff(std::max(sa.j_max(), pb.j_max()));
  for (int j = -diff.j_max(); j <= diff.j_max(); ++j)
    diff.set_coeff(j, sa.coeff(j) - pb.coeff(j));
  return hs_norm(diff, s) / hs_norm(u0, s);
}

}  // namespace floq
