#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "floq/flow.hpp"
#include "floq/params.hpp"
#include "floq/potential.hpp"
#include "floq/torus_field.hpp"

namespace floq {

/// One growth experiment, parsed from a schema-versioned JSON document.
struct ExperimentConfig {
  int schema = 1;
  std::string label = "run";
  /// "zero" | "analytic3" (quasi-periodic builtin) | "periodic3" (integer-T
  /// commensurate builtin) | "random-refresh" | "file"
  std::string scenario = "analytic3";
  std::string potential_file;       // scenario == "file"
  std::string potential_json;       // inline alternative to potential_file
  std::vector<double> s_list{1.0};
  double t_final = 1e4;
  std::string grid = "dyadic";      // "dyadic" (+ uniform tail) or "uniform"
  int uniform_samples = 24;
  double dt = 0.01;
  int band = 128;
  double T = 16.0;                  // scale entering J0 and the n-schedule
  int J = 64;                       // affordable J cap (the paper wants T^{10s})
  ParamPack pack;
  std::uint64_t seed = 1;
  int refresh_k_max = 3;            // random-refresh scenario
  double refresh_amp = 0.3;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  void validate() const;
  /// Report times, snapped to dt multiples, strictly increasing, starting at 0.
  std::vector<double> report_times() const;
};

/// Fit of the logarithmic growth model ||u(t)|| ~ C (log(t+2))^{varsigma * s},
/// with the polynomial alternative ~ C_poly (t+1)^{eps} for model selection.
struct GrowthFit {
  double C = 0.0;
  double varsigma = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap 95% interval on varsigma
  double resid = 0.0;               // RMS residual of log-norms, log model
  double C_poly = 0.0;
  double eps = 0.0;
  double resid_poly = 0.0;
  bool log_selected = true;         // lower-residual model
};

struct GrowthRecord {
  std::string label;
  std::vector<double> times;
  std::vector<double> s_list;
  std::vector<std::vector<double>> norms;  // norms[si][ti] = ||u(t_i)||_{H^s}
  std::vector<GrowthFit> fits;             // one per s
  double J_schedule_gap = 0.0;             // T^{10 max(s)} / J_used (recorded cap)
  int J_used = 0;
};

/// Fit over the tail half of the series (>= 16 tail samples required).
GrowthFit fit_log_exponent(const std::vector<double>& times,
                           const std::vector<double>& norms, double s,
                           std::uint64_t seed = 42);

/// Owning potential sampler built from a scenario config; sampler == nullptr
/// means free flow.
struct SamplerBundle {
  std::shared_ptr<AnalyticPotential> potential;  // when analytic-backed
  std::unique_ptr<PotentialSampler> sampler;
};
SamplerBundle make_sampler(const ExperimentConfig& config);

/// Builtin analytic potentials by scenario name ("analytic3", "periodic3").
AnalyticPotential builtin_potential(const std::string& name);

/// Default datum: u0(j) proportional to (1+j^2)^{-(s+1)/2} on |j| <= band/2,
/// normalized in H^s.
TorusField default_datum(int band, double s);

/// On integrator abort the exception propagates; if partial is non-null it
/// receives the record accumulated so far.
GrowthRecord run_growth(const ExperimentConfig& config,
                        GrowthRecord* partial = nullptr);

/// Deterministic CSV: "# floq-growth v1" header, %.17g columns t then one
/// norm column per s.
void write_growth_csv(const GrowthRecord& rec, std::ostream& os);

/// Piecewise-analytic potential with random Fourier phases redrawn on unit
/// time intervals, crossfaded by a Gevrey-smooth step so V stays smooth.
class RandomRefreshSampler final : public PotentialSampler {
 public:
  RandomRefreshSampler(int k_max, double amp, std::uint64_t seed);
  void sample_grid(double t, std::span<double> v) const override;
  cd x_coeff(int k, double t) const override;
  int x_band() const override { return k_max_; }

 private:
  double phase(long interval, int k) const;
  double blend(double tau) const;
  int k_max_ = 0;
  double amp_ = 0.0;
  std::uint64_t seed_ = 0;
};

struct ThreeBands {
  TorusField low, mid, high;  // Pi_{2J0} u, (Pi_{J/2}-Pi_{2J0}) u, rest
};
/// Requires 2*J0 < J/2; the parts sum to u exactly coefficient-wise.
ThreeBands three_band_split(const TorusField& u, int J, int J0);

struct BandIterationRow {
  int r = 0;              // step [r-1, r]
  double low = 0.0;       // H^s norms of the three bands of S(r-1,r) u
  double mid = 0.0;
  double high = 0.0;
  double cumulative_low = 0.0;  // H^s norm of the low-band iterate
};

/// Iterates u <- Pi_{2J0} S(r-1, r) u for r = 1..floor(T), recording band
/// norms and per-step mid/high leakage.
std::vector<BandIterationRow> band_iteration_trace(const TorusField& u0,
                                                   const PotentialSampler* V,
                                                   double T, int J, int J0,
                                                   double s,
                                                   const FlowConfig& config);

struct ScenarioRow {
  std::string label;
  double varsigma_hat = 0.0;
  double tail_score = 0.0;  // sup/median - 1 over the tail half of the series
  bool bounded = false;     // tail_score <= 0.05
  bool log_selected = true;
  bool failed = false;
  std::string error;
};

/// Runs each scenario (first s of its s_list) and tabulates the verdicts.
/// Per-scenario failures are captured in the row, not propagated.
std::vector<ScenarioRow> scenario_compare(
    const std::vector<ExperimentConfig>& configs);

void write_compare_csv(const std::vector<ScenarioRow>& rows, std::ostream& os);

}  // namespace floq
