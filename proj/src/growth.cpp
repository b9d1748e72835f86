#include "floq/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "floq/errors.hpp"
#include "json.hpp"

namespace floq {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void csv_num(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  ExperimentConfig c;
  c.schema = doc.value("schema", 1);
  if (c.schema != 1)
    throw std::invalid_argument("experiment config: unsupported schema " +
                                std::to_string(c.schema));
  c.label = doc.value("label", c.label);
  c.scenario = doc.value("scenario", c.scenario);
  c.potential_file = doc.value("potential_file", std::string());
  if (doc.contains("potential")) c.potential_json = doc["potential"].dump();
  if (doc.contains("s_list")) c.s_list = doc["s_list"].get<std::vector<double>>();
  c.t_final = doc.value("t_final", c.t_final);
  c.grid = doc.value("grid", c.grid);
  c.uniform_samples = doc.value("uniform_samples", c.uniform_samples);
  c.dt = doc.value("dt", c.dt);
  c.band = doc.value("band", c.band);
  c.T = doc.value("T", c.T);
  c.J = doc.value("J", c.J);
  c.seed = doc.value("seed", c.seed);
  c.refresh_k_max = doc.value("refresh_k_max", c.refresh_k_max);
  c.refresh_amp = doc.value("refresh_amp", c.refresh_amp);
  if (doc.contains("pack")) c.pack = param_pack(doc["pack"].get<std::string>());
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ExperimentConfig::validate() const {
  pack.validate();
  if (t_final <= 0) throw std::invalid_argument("experiment config: t_final <= 0");
  if (dt <= 0) throw std::invalid_argument("experiment config: dt <= 0");
  if (band < 8) throw std::invalid_argument("experiment config: band < 8");
  if (T <= 1.0) throw std::invalid_argument("experiment config: T must be > 1");
  if (J < 4 || J % 4 != 0)
    throw std::invalid_argument("experiment config: J must be a multiple of 4");
  if (s_list.empty())
    throw std::invalid_argument("experiment config: s_list empty");
  for (double s : s_list)
    if (s < 0) throw std::invalid_argument("experiment config: s < 0");
  if (grid != "dyadic" && grid != "uniform")
    throw std::invalid_argument("experiment config: grid must be dyadic|uniform");
  if (uniform_samples < 2)
    throw std::invalid_argument("experiment config: uniform_samples < 2");
  if (scenario != "zero" && scenario != "analytic3" && scenario != "periodic3" &&
      scenario != "random-refresh" && scenario != "file")
    throw std::invalid_argument("experiment config: unknown scenario " + scenario);
  if (scenario == "file" && potential_file.empty() && potential_json.empty())
    throw std::invalid_argument(
        "experiment config: scenario=file needs potential or potential_file");
}

std::vector<double> ExperimentConfig::report_times() const {
  std::vector<double> nominal{0.0};
  if (grid == "dyadic") {
    for (double t = 1.0; t <= t_final; t *= 2.0) nominal.push_back(t);
    double lo = t_final / 2.0;
    for (int i = 1; i <= uniform_samples; ++i)
      nominal.push_back(lo + (t_final - lo) * i / uniform_samples);
  } else {
    for (int i = 1; i <= uniform_samples; ++i)
      nominal.push_back(t_final * i / uniform_samples);
  }
  std::sort(nominal.begin(), nominal.end());
  std::vector<double> out;
  for (double t : nominal) {
    double snapped = std::round(t / dt) * dt;
    if (out.empty() || snapped > out.back() + 0.5 * dt) out.push_back(snapped);
  }
  return out;
}

AnalyticPotential builtin_potential(const std::string& name) {
  auto mode = [](int k, double amp, double omega) {
    PotentialMode m;
    m.k = k;
    m.terms.push_back(TrigTerm{amp, omega, 0.0});
    return m;
  };
  if (name == "analytic3") {
    // incommensurate frequencies: genuinely quasi-periodic in t
    std::vector<PotentialMode> modes{mode(1, 0.12, 0.5),
                                     mode(2, 0.10, 0.5 * std::sqrt(2.0)),
                                     mode(3, 0.08, 0.5 * std::sqrt(3.0))};
    return AnalyticPotential(std::move(modes), 1.0, 0.6);
  }
  if (name == "periodic3") {
    // commensurate frequencies: time-periodic with period 4*pi
    std::vector<PotentialMode> modes{mode(1, 0.12, 0.5), mode(2, 0.10, 1.0),
                                     mode(3, 0.08, 1.5)};
    return AnalyticPotential(std::move(modes), 1.0, 0.6);
  }
  throw std::invalid_argument("unknown builtin potential: " + name);
}

SamplerBundle make_sampler(const ExperimentConfig& config) {
  SamplerBundle b;
  if (config.scenario == "zero") return b;
  if (config.scenario == "random-refresh") {
    b.sampler = std::make_unique<RandomRefreshSampler>(
        config.refresh_k_max, config.refresh_amp, config.seed);
    return b;
  }
  if (config.scenario == "file") {
    b.potential = std::make_shared<AnalyticPotential>(
        config.potential_json.empty()
            ? AnalyticPotential::from_json_file(config.potential_file)
            : AnalyticPotential::from_json_text(config.potential_json));
  } else {
    b.potential =
        std::make_shared<AnalyticPotential>(builtin_potential(config.scenario));
  }
  b.sampler = std::make_unique<AnalyticSampler>(*b.potential);
  return b;
}

TorusField default_datum(int band, double s) {
  // Supported on |j| <= band/2 so one application of a band-limited
  // potential cannot push mass past the working band.
  const int half = band / 2;
  TorusField u(band);
  for (int j = -half; j <= half; ++j)
    u.set_coeff(j, std::pow(1.0 + static_cast<double>(j) * j, -(s + 1.0) / 2.0));
  double nrm = hs_norm(u, s);
  for (int j = -half; j <= half; ++j) u.set_coeff(j, u.coeff(j) / nrm);
  return u;
}

namespace {

struct LineFit {
  double intercept = 0.0, slope = 0.0, rms = 0.0;
  bool flat = false;
};

LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double ymean = sy / n;
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - ymean));
  if (spread < 1e-12) {
    f.intercept = ymean;
    f.flat = true;
    return f;
  }
  double det = n * sxx - sx * sx;
  if (det <= 0) {
    f.intercept = ymean;
    f.flat = true;
    return f;
  }
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    acc += r * r;
  }
  f.rms = std::sqrt(acc / n);
  return f;
}

GrowthFit fit_core(const std::vector<double>& times,
                   const std::vector<double>& norms, double s,
                   std::uint64_t seed, size_t min_tail) {
  if (times.size() != norms.size())
    throw std::invalid_argument("fit_log_exponent: size mismatch");
  const size_t tail_from = times.size() / 2;
  const size_t m = times.size() - tail_from;
  if (m < min_tail)
    throw std::invalid_argument("fit_log_exponent: needs >= " +
                                std::to_string(min_tail) + " tail samples, got " +
                                std::to_string(m));
  std::vector<double> xl(m), xp(m), y(m);
  for (size_t i = 0; i < m; ++i) {
    double t = times[tail_from + i];
    if (norms[tail_from + i] <= 0)
      throw std::invalid_argument("fit_log_exponent: nonpositive norm");
    xl[i] = std::log(std::log(t + 2.0));
    xp[i] = std::log(t + 1.0);
    y[i] = std::log(norms[tail_from + i]);
  }
  const double se = std::max(s, 1e-12);

  GrowthFit out;
  LineFit lg = line_fit(xl, y);
  out.C = std::exp(lg.intercept);
  out.varsigma = lg.flat ? 0.0 : lg.slope / se;
  out.resid = lg.rms;
  LineFit pl = line_fit(xp, y);
  out.C_poly = std::exp(pl.intercept);
  out.eps = pl.flat ? 0.0 : pl.slope;
  out.resid_poly = pl.rms;
  out.log_selected = lg.flat || out.resid <= out.resid_poly;

  if (lg.flat) return out;  // zero-width interval for degenerate data

  // bootstrap interval on varsigma: resample (x, y) pairs
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, m - 1);
  std::vector<double> slopes;
  std::vector<double> bx(m), by(m);
  for (int b = 0; b < 200; ++b) {
    for (size_t i = 0; i < m; ++i) {
      size_t r = pick(rng);
      bx[i] = xl[r];
      by[i] = y[r];
    }
    LineFit f = line_fit(bx, by);
    if (!f.flat) slopes.push_back(f.slope / se);
  }
  if (slopes.empty()) {
    out.ci_lo = out.ci_hi = out.varsigma;
    return out;
  }
  std::sort(slopes.begin(), slopes.end());
  out.ci_lo = slopes[static_cast<size_t>(0.025 * (slopes.size() - 1))];
  out.ci_hi = slopes[static_cast<size_t>(0.975 * (slopes.size() - 1))];
  return out;
}

}  // namespace

GrowthFit fit_log_exponent(const std::vector<double>& times,
                           const std::vector<double>& norms, double s,
                           std::uint64_t seed) {
  return fit_core(times, norms, s, seed, 16);
}

GrowthRecord run_growth(const ExperimentConfig& config, GrowthRecord* partial) {
  config.validate();
  SamplerBundle bundle = make_sampler(config);

  GrowthRecord rec;
  rec.label = config.label;
  rec.s_list = config.s_list;
  rec.times = config.report_times();
  rec.J_used = config.J;
  double smax = *std::max_element(config.s_list.begin(), config.s_list.end());
  rec.J_schedule_gap = std::pow(config.T, 10.0 * smax) / config.J;

  FlowConfig fcfg;
  fcfg.dt = config.dt;
  fcfg.band = config.band;

  for (double s : config.s_list) {
    TorusField u0 = default_datum(config.band / 2, s);
    Stepper st(u0, bundle.sampler.get(), 0.0, fcfg);
    std::vector<double> series;
    series.push_back(hs_norm(st.state(), s));
    try {
      double l2_0 = st.l2();
      for (size_t i = 1; i < rec.times.size(); ++i) {
        long steps = std::lround((rec.times[i] - rec.times[i - 1]) / config.dt);
        while (steps > 0) {
          int todo = static_cast<int>(std::min<long>(steps, 1 << 20));
          st.advance(todo);
          steps -= todo;
        }
        if (std::abs(st.l2() - l2_0) > 1e-6 * l2_0)
          throw InvariantViolation("run_growth: L2 drift at t=" +
                                   std::to_string(st.time()));
        series.push_back(hs_norm(st.state(), s));
      }
    } catch (...) {
      rec.norms.push_back(std::move(series));
      if (partial) *partial = rec;
      throw;
    }
    rec.norms.push_back(std::move(series));
    rec.fits.push_back(fit_core(rec.times, rec.norms.back(), s, config.seed, 4));
  }
  return rec;
}

void write_growth_csv(const GrowthRecord& rec, std::ostream& os) {
  os << "# floq-growth v1 label=" << rec.label << "\n";
  os << "t";
  for (double s : rec.s_list) {
    os << ",hs_norm_s=";
    csv_num(os, s);
  }
  os << "\n";
  for (size_t i = 0; i < rec.times.size(); ++i) {
    csv_num(os, rec.times[i]);
    for (const auto& series : rec.norms) {
      os << ",";
      csv_num(os, i < series.size() ? series[i] : 0.0);
    }
    os << "\n";
  }
}

RandomRefreshSampler::RandomRefreshSampler(int k_max, double amp,
                                           std::uint64_t seed)
    : k_max_(k_max), amp_(amp), seed_(seed) {
  if (k_max < 1) throw std::invalid_argument("RandomRefreshSampler: k_max < 1");
  if (amp <= 0) throw std::invalid_argument("RandomRefreshSampler: amp <= 0");
}

double RandomRefreshSampler::phase(long interval, int k) const {
  std::uint64_t h = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(
                                           interval * 1315423911L + k)));
  return 2.0 * kPi * (h >> 11) * 0x1.0p-53;
}

double RandomRefreshSampler::blend(double tau) const {
  // Gevrey-smooth 0 -> 1 step on [0, 1]
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  double a = std::exp(-std::pow(tau, -5.0));
  double b = std::exp(-std::pow(1.0 - tau, -5.0));
  if (a + b == 0.0) return tau < 0.5 ? 0.0 : 1.0;
  return a / (a + b);
}

cd RandomRefreshSampler::x_coeff(int k, double t) const {
  int a = std::abs(k);
  if (a == 0 || a > k_max_) return cd(0.0, 0.0);
  long m = static_cast<long>(std::floor(t));
  double w = blend(t - static_cast<double>(m));
  double amp_k = 0.5 * amp_ / a;
  cd c = amp_k * ((1.0 - w) * std::polar(1.0, phase(m, a)) +
                  w * std::polar(1.0, phase(m + 1, a)));
  return k > 0 ? c : std::conj(c);
}

void RandomRefreshSampler::sample_grid(double t, std::span<double> v) const {
  const int n = static_cast<int>(v.size());
  std::vector<cd> ck(k_max_ + 1);
  for (int k = 1; k <= k_max_; ++k) ck[k] = x_coeff(k, t);
  for (int i = 0; i < n; ++i) {
    double x = -kPi + 2.0 * kPi * i / n;
    double acc = 0.0;
    for (int k = 1; k <= k_max_; ++k)
      acc += 2.0 * (ck[k] * std::polar(1.0, k * x)).real();
    v[i] = acc;
  }
}

ThreeBands three_band_split(const TorusField& u, int J, int J0) {
  if (J0 < 1 || J % 4 != 0 || !(2 * J0 < J / 2))
    throw std::invalid_argument(
        "three_band_split: requires J0 >= 1, J a multiple of 4, 2*J0 < J/2");
  ThreeBands out;
  out.low = apply_multiplier(u, 2 * J0);
  TorusField pj = apply_multiplier(u, J / 2);
  out.mid = TorusField(u.j_max());
  out.high = TorusField(u.j_max());
  for (int j = -u.j_max(); j <= u.j_max(); ++j) {
    out.mid.set_coeff(j, pj.coeff(j) - out.low.coeff(j));
    out.high.set_coeff(j, u.coeff(j) - pj.coeff(j));
  }
  return out;
}

std::vector<BandIterationRow> band_iteration_trace(const TorusField& u0,
                                                   const PotentialSampler* V,
                                                   double T, int J, int J0,
                                                   double s,
                                                   const FlowConfig& config) {
  FlowConfig cfg = config;
  cfg.substeps_per_report = 1 << 28;
  std::vector<BandIterationRow> rows;
  TorusField u = u0;
  const int steps = static_cast<int>(std::floor(T));
  for (int r = 1; r <= steps; ++r) {
    Trajectory traj = evolve(u, V, r - 1.0, static_cast<double>(r), cfg);
    ThreeBands bands = three_band_split(traj.states.back(), J, J0);
    BandIterationRow row;
    row.r = r;
    row.low = hs_norm(bands.low, s);
    row.mid = hs_norm(bands.mid, s);
    row.high = hs_norm(bands.high, s);
    u = bands.low;
    row.cumulative_low = hs_norm(u, s);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScenarioRow> scenario_compare(
    const std::vector<ExperimentConfig>& configs) {
  if (configs.empty())
    throw std::invalid_argument("scenario_compare: needs >= 1 scenario");
  std::vector<ScenarioRow> rows;
  for (const auto& cfg : configs) {
    ScenarioRow row;
    row.label = cfg.label;
    try {
      GrowthRecord rec = run_growth(cfg);
      const auto& series = rec.norms.at(0);
      size_t from = series.size() / 2;
      std::vector<double> tail(series.begin() + from, series.end());
      std::sort(tail.begin(), tail.end());
      double med = tail[tail.size() / 2];
      double sup = tail.back();
      row.tail_score = med > 0 ? sup / med - 1.0 : 0.0;
      row.bounded = row.tail_score <= 0.05;
      row.varsigma_hat = rec.fits.at(0).varsigma;
      row.log_selected = rec.fits.at(0).log_selected;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_compare_csv(const std::vector<ScenarioRow>& rows, std::ostream& os) {
  os << "# floq-compare v1\n";
  os << "label,varsigma_hat,tail_score,bounded,model,status\n";
  for (const auto& r : rows) {
    os << r.label << ",";
    csv_num(os, r.varsigma_hat);
    os << ",";
    csv_num(os, r.tail_score);
    os << "," << (r.bounded ? 1 : 0) << ","
       << (r.log_selected ? "log" : "poly") << ","
       << (r.failed ? "failed" : "ok") << "\n";
  }
}

}  // namespace floq
