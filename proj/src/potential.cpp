#include "floq/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "floq/fft.hpp"
#include "floq/params.hpp"
#include "json.hpp"

namespace floq {

namespace {
constexpr double kPi = std::numbers::pi;
}

double TrigTerm::eval(double t) const { return amp * std::cos(omega * t + phase); }

double PotentialMode::eval(double t) const {
  double acc = 0.0;
  for (const auto& term : terms) acc += term.eval(t);
  return acc;
}

AnalyticPotential::AnalyticPotential(std::vector<PotentialMode> modes,
                                     double strip_width, double sup_bound)
    : modes_(std::move(modes)), strip_width_(strip_width), sup_bound_(sup_bound) {
  if (strip_width_ <= 0.0)
    throw std::invalid_argument("AnalyticPotential: strip_width must be > 0");
  if (sup_bound_ <= 0.0 && !modes_.empty())
    throw std::invalid_argument("AnalyticPotential: sup_bound must be > 0");

  // Close under conjugation: a_{-k} = a_k (real time coefficients). A missing
  // partner is mirrored; an inconsistent explicit partner is rejected.
  std::map<int, PotentialMode> by_k;
  for (auto& m : modes_) {
    if (by_k.count(m.k))
      throw std::invalid_argument("AnalyticPotential: duplicate mode k=" +
                                  std::to_string(m.k));
    by_k[m.k] = m;
  }
  for (const auto& [k, m] : std::map<int, PotentialMode>(by_k)) {
    auto it = by_k.find(-k);
    if (it == by_k.end()) {
      PotentialMode mirror = m;
      mirror.k = -k;
      by_k[-k] = mirror;
    } else if (k > 0) {
      // sampled consistency check of a_{-k} == a_k
      for (double t : {0.0, 0.37, 1.91, 5.3, -2.6}) {
        if (std::abs(m.eval(t) - it->second.eval(t)) > 1e-12)
          throw std::invalid_argument(
              "AnalyticPotential: modes k=" + std::to_string(k) +
              " and -k are not conjugate partners (V would not be real)");
      }
    }
  }
  modes_.clear();
  max_k_ = 0;
  for (auto& [k, m] : by_k) {
    max_k_ = std::max(max_k_, std::abs(k));
    modes_.push_back(std::move(m));
  }

  // sampled sup-norm check against the declared bound
  double sup = 0.0;
  for (int ix = 0; ix < 64; ++ix)
    for (int it = 0; it < 257; ++it) {
      double x = -kPi + 2 * kPi * ix / 64.0;
      double t = -50.0 + 100.0 * it / 256.0;
      sup = std::max(sup, std::abs(eval(x, t)));
    }
  if (sup > sup_bound_ * (1.0 + 1e-9))
    throw std::invalid_argument(
        "AnalyticPotential: sampled sup " + std::to_string(sup) +
        " exceeds declared sup_bound " + std::to_string(sup_bound_));
}

double AnalyticPotential::eval(double x, double t) const {
  double acc = 0.0;
  for (const auto& m : modes_) acc += m.eval(t) * std::cos(m.k * x);
  // a_{-k} = a_k, so the e^{ikx} + e^{-ikx} pair contributes 2 a_k cos(kx);
  // the loop above visits both k and -k, giving exactly that.
  return acc;
}

double AnalyticPotential::time_coeff(int k, double t) const {
  for (const auto& m : modes_)
    if (m.k == k) return m.eval(t);
  return 0.0;
}

AnalyticPotential AnalyticPotential::from_json_text(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  std::vector<PotentialMode> modes;
  for (const auto& jm : doc.at("modes")) {
    PotentialMode m;
    m.k = jm.at("k").get<int>();
    for (const auto& jt : jm.at("terms")) {
      TrigTerm term;
      term.amp = jt.at("amp").get<double>();
      term.omega = jt.value("omega", 0.0);
      term.phase = jt.value("phase", 0.0);
      std::string fn = jt.value("fn", "cos");
      if (fn == "sin")
        term.phase -= kPi / 2.0;
      else if (fn != "cos")
        throw std::invalid_argument("potential JSON: fn must be cos or sin");
      m.terms.push_back(term);
    }
    modes.push_back(std::move(m));
  }
  return AnalyticPotential(std::move(modes), doc.at("strip_width").get<double>(),
                           doc.at("sup_bound").get<double>());
}

AnalyticPotential AnalyticPotential::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open potential file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

namespace {

// Standard Gevrey-alpha bump on (0,1), flat to all orders at both ends.
double gevrey_bump(double v, double p) {
  double w = 1.0 - (2.0 * v - 1.0) * (2.0 * v - 1.0);
  if (w <= 0.0) return 0.0;
  double e = std::pow(w, -p);
  return e > 700.0 ? 0.0 : std::exp(-e);
}

// Composite Simpson of the bump over [lo, 1].
double bump_integral(double lo, double p) {
  constexpr int kIntervals = 512;  // even
  const double h = (1.0 - lo) / kIntervals;
  double acc = gevrey_bump(lo, p) + gevrey_bump(1.0, p);
  for (int i = 1; i < kIntervals; ++i)
    acc += gevrey_bump(lo + i * h, p) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

GevreyCutoff::GevreyCutoff(double alpha) : alpha_(alpha) {
  if (alpha <= 1.0)
    throw std::invalid_argument(
        "GevreyCutoff: alpha must be > 1 (no analytic compactly supported bump)");
  p_ = 1.0 / (alpha - 1.0);
  norm_ = bump_integral(0.0, p_);
}

GevreyCutoff build_cutoff(double alpha) { return GevreyCutoff(alpha); }

double GevreyCutoff::value(double tau) const {
  double a = std::abs(tau);
  if (a <= 1.0) return 1.0;
  if (a >= kPi) return 0.0;
  // Gevrey-order-alpha smooth step on the transition interval [1, pi]:
  // the normalized tail integral of the standard bump. This keeps the
  // transition spread over the whole interval at every alpha, unlike a
  // two-sided exp crossfade, whose effective width collapses as alpha -> 1.
  double u = (a - 1.0) / (kPi - 1.0);
  return std::clamp(bump_integral(u, p_) / norm_, 0.0, 1.0);
}

double eval_table(const SpaceTimeField& table, double x, double t) {
  const double T = table.period_scale();
  cd acc(0.0, 0.0);
  for (int j = -table.j_max(); j <= table.j_max(); ++j) {
    cd row(0.0, 0.0);
    for (int n = -table.n_max(); n <= table.n_max(); ++n) {
      cd c = table.coeff(j, n);
      if (c != cd(0.0, 0.0)) row += c * std::polar(1.0, n * t / T);
    }
    acc += row * std::polar(1.0, static_cast<double>(j) * x);
  }
  return acc.real();
}

PeriodizedPotential periodize(const AnalyticPotential& V, double T,
                              const GevreyCutoff& cutoff, int j_max, int n_max,
                              double alias_tol) {
  if (T < 2.0) throw std::invalid_argument("periodize: requires T >= 2");
  int nx = fft::next_pow2(std::max({4 * j_max, 4 * V.max_k(), 16}));
  int nt = fft::next_pow2(std::max(4 * n_max, 16));

  std::vector<cd> grid(static_cast<size_t>(nx) * nt);
  for (int m = 0; m < nx; ++m) {
    double x = -kPi + 2.0 * kPi * m / nx;
    for (int l = 0; l < nt; ++l) {
      double t = -kPi * T + 2.0 * kPi * T * l / nt;
      double v = 0.0;
      for (int r = -1; r <= 1; ++r) {
        double tr = t + 2.0 * kPi * r * T;
        double phi = cutoff.value(tr / T);
        if (phi != 0.0) v += V.eval(x, tr) * phi;
      }
      grid[static_cast<size_t>(m) * nt + l] = v;
    }
  }
  fft::forward_2d(grid, nx, nt);

  auto pick = [&](int j, int n) {
    int kx = j >= 0 ? j : j + nx;
    int kt = n >= 0 ? n : n + nt;
    double sign = ((j + n) % 2 == 0) ? 1.0 : -1.0;
    return grid[static_cast<size_t>(kx) * nt + kt] * sign;
  };

  SpaceTimeField table(j_max, n_max, T);
  double peak = 0.0;
  for (int j = -j_max; j <= j_max; ++j)
    for (int n = -n_max; n <= n_max; ++n) {
      cd c = pick(j, n);
      table.set_coeff(j, n, c);
      peak = std::max(peak, std::abs(c));
    }

  // Hermitian symmetrization (exact realness of the stored table).
  for (int j = 0; j <= j_max; ++j)
    for (int n = -n_max; n <= n_max; ++n) {
      if (j == 0 && n < 0) continue;
      cd avg = 0.5 * (table.coeff(j, n) + std::conj(table.coeff(-j, -n)));
      table.set_coeff(j, n, avg);
      table.set_coeff(-j, -n, std::conj(avg));
    }

  // Aliasing check at the outermost retained frequencies.
  if (peak > 0.0) {
    double edge_x = 0.0, edge_t = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
      edge_x = std::max(edge_x, std::abs(table.coeff(j_max, n)));
      edge_x = std::max(edge_x, std::abs(table.coeff(-j_max, n)));
    }
    for (int j = -j_max; j <= j_max; ++j) {
      edge_t = std::max(edge_t, std::abs(table.coeff(j, n_max)));
      edge_t = std::max(edge_t, std::abs(table.coeff(j, -n_max)));
    }
    // The x band is finite by construction, so only warn-reject when the
    // declared band is genuinely too small for the parent potential.
    if (V.max_k() > j_max || edge_x / peak > alias_tol)
      throw std::runtime_error("periodize: aliasing in x band (edge level " +
                               std::to_string(edge_x / peak) + ")");
    if (edge_t / peak > alias_tol)
      throw std::runtime_error("periodize: aliasing in t band (edge level " +
                               std::to_string(edge_t / peak) + ")");
  }

  return PeriodizedPotential(std::move(table), V, cutoff);
}

TruncatedPotential truncate(const PeriodizedPotential& V1, double sigma,
                            double delta) {
  const double alpha = V1.cutoff().alpha();
  if (!(sigma > alpha + delta) || !(alpha + delta > 1.0))
    throw std::invalid_argument("truncate: requires sigma > alpha + delta > 1");

  const double T = V1.T();
  const double lg = log_scale(T);
  int k_x = static_cast<int>(std::ceil(std::pow(lg, sigma)));
  int k_t = static_cast<int>(std::ceil(T * std::pow(lg, sigma)));
  const auto& src = V1.table();
  if (k_x > src.j_max() || k_t > src.n_max())
    throw std::invalid_argument(
        "truncate: rectangle (" + std::to_string(k_x) + "," + std::to_string(k_t) +
        ") exceeds stored table (" + std::to_string(src.j_max()) + "," +
        std::to_string(src.n_max()) + ")");

  TruncatedPotential out;
  out.table_ = SpaceTimeField(k_x, k_t, T);
  out.k_x_ = k_x;
  out.k_t_ = k_t;
  out.sigma_ = sigma;
  out.delta_ = delta;
  for (int j = -k_x; j <= k_x; ++j)
    for (int n = -k_t; n <= k_t; ++n) out.table_.set_coeff(j, n, src.coeff(j, n));

  // Measured sup gap on a sample grid: the dropped modes summed directly.
  double gap = 0.0;
  for (int ix = 0; ix < 16; ++ix)
    for (int it = 0; it < 32; ++it) {
      double x = -kPi + 2.0 * kPi * ix / 16.0;
      double t = -kPi * T + 2.0 * kPi * T * it / 32.0;
      cd diff(0.0, 0.0);
      for (int j = -src.j_max(); j <= src.j_max(); ++j)
        for (int n = -src.n_max(); n <= src.n_max(); ++n) {
          if (std::abs(j) <= k_x && std::abs(n) <= k_t) continue;
          cd c = src.coeff(j, n);
          if (c != cd(0.0, 0.0))
            diff += c * std::polar(1.0, j * x + n * t / T);
        }
      gap = std::max(gap, std::abs(diff.real()));
    }
  out.measured_gap_ = gap;
  return out;
}

namespace {

// Least-squares upper-envelope fit log(env) <= log(C) - c * r on (r, env)
// pairs; C is lifted so the bound holds on every sample.
void fit_envelope(const std::vector<std::pair<double, double>>& pts, double& C,
                  double& c, bool& ok) {
  C = 0.0;
  c = 0.0;
  ok = false;
  std::vector<std::pair<double, double>> usable;
  for (const auto& [r, env] : pts)
    if (env > 1e-300) usable.emplace_back(r, std::log(env));
  if (usable.size() < 2) {
    // nothing (or a single point) to fit: vacuously certified
    ok = true;
    for (const auto& [r, env] : pts) C = std::max(C, env);
    return;
  }
  double sr = 0, sy = 0, srr = 0, sry = 0;
  for (const auto& [r, y] : usable) {
    sr += r;
    sy += y;
    srr += r * r;
    sry += r * y;
  }
  double n = static_cast<double>(usable.size());
  double det = n * srr - sr * sr;
  if (det <= 0) return;
  double slope = (n * sry - sr * sy) / det;
  c = -slope;
  if (c <= 0) return;
  double logC = -1e300;
  for (const auto& [r, y] : usable) logC = std::max(logC, y + c * r);
  C = std::exp(logC);
  ok = true;
}

}  // namespace

DecayReport decay_audit(const PeriodizedPotential& V1, double alpha,
                        double delta) {
  const auto& tab = V1.table();
  const double T = V1.T();
  const double lg = log_scale(T);
  DecayReport rep;
  rep.j_onset = static_cast<int>(std::ceil(std::pow(lg, delta)));
  rep.n_onset = static_cast<int>(std::ceil(T * std::pow(lg, delta)));

  std::vector<std::pair<double, double>> xs, ns;
  for (int j = rep.j_onset; j <= tab.j_max(); ++j) {
    double env = 0.0;
    for (int n = -tab.n_max(); n <= tab.n_max(); ++n)
      env = std::max(env, std::abs(tab.coeff(j, n)));
    xs.emplace_back(static_cast<double>(j), env);
  }
  for (int n = rep.n_onset; n <= tab.n_max(); ++n) {
    double env = 0.0;
    for (int j = -tab.j_max(); j <= tab.j_max(); ++j)
      env = std::max(env, std::abs(tab.coeff(j, n)));
    ns.emplace_back(std::pow(n / T, 1.0 / alpha), env);
  }
  fit_envelope(xs, rep.C_x, rep.c_x, rep.x_ok);
  fit_envelope(ns, rep.C_n, rep.c_n, rep.n_ok);
  return rep;
}

}  // namespace floq
