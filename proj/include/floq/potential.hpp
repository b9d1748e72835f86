#pragma once

#include <string>
#include <vector>

#include "floq/torus_field.hpp"

namespace floq {

/// One real trigonometric term amp*cos(omega*t + phase) of a time coefficient.
/// sin terms are normalized to cos via a -pi/2 phase shift at load.
struct TrigTerm {
  double amp = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double eval(double t) const;
};

/// One spatial Fourier mode k with a real-valued time coefficient a_k(t).
struct PotentialMode {
  int k = 0;
  std::vector<TrigTerm> terms;
  double eval(double t) const;
};

/// Structurally specified real analytic potential
/// V(x,t) = sum_k a_k(t) e^{ikx}, with a_{-k} = a_k real (so V is real).
class AnalyticPotential {
 public:
  AnalyticPotential(std::vector<PotentialMode> modes, double strip_width,
                    double sup_bound);
  static AnalyticPotential from_json_text(const std::string& text);
  static AnalyticPotential from_json_file(const std::string& path);

  double eval(double x, double t) const;
  double time_coeff(int k, double t) const;  // a_k(t), 0 if absent
  int max_k() const { return max_k_; }
  double strip_width() const { return strip_width_; }
  double sup_bound() const { return sup_bound_; }
  const std::vector<PotentialMode>& modes() const { return modes_; }

 private:
  std::vector<PotentialMode> modes_;  // conjugate-closed, sorted by k
  int max_k_ = 0;
  double strip_width_ = 0.0;
  double sup_bound_ = 0.0;
};

/// Compactly supported bump on [-pi, pi] of Gevrey order alpha:
/// identically 1 on |tau| <= 1, identically 0 beyond |tau| >= pi.
class GevreyCutoff {
 public:
  explicit GevreyCutoff(double alpha);
  double alpha() const { return alpha_; }
  double value(double tau) const;

 private:
  double alpha_ = 0.0;
  double p_ = 0.0;     // 1/(alpha-1)
  double norm_ = 1.0;  // full-interval integral of the transition bump
};

GevreyCutoff build_cutoff(double alpha);

/// Evaluates sum_{j,n} c(j,n) e^{i(jx + n t/T)} as a real number (the table
/// must be Hermitian-symmetric).
double eval_table(const SpaceTimeField& table, double x, double t);

/// V1: the 2*pi*T time-periodic replacement of V, agreeing with V on |t| <= T,
/// held as a space-time coefficient table.
class PeriodizedPotential {
 public:
  PeriodizedPotential(SpaceTimeField table, const AnalyticPotential& parent,
                      GevreyCutoff cutoff)
      : table_(std::move(table)), parent_(&parent), cutoff_(cutoff) {}

  const SpaceTimeField& table() const { return table_; }
  double T() const { return table_.period_scale(); }
  double eval(double x, double t) const { return eval_table(table_, x, t); }
  const AnalyticPotential& parent() const { return *parent_; }
  const GevreyCutoff& cutoff() const { return cutoff_; }

 private:
  SpaceTimeField table_;
  const AnalyticPotential* parent_;
  GevreyCutoff cutoff_;
};

/// FFT quadrature of V1 over one space-time period. Grid sizes are at least
/// 4x the retained bands; energy at the last retained frequency above
/// alias_tol (relative to the table peak) is rejected.
PeriodizedPotential periodize(const AnalyticPotential& V, double T,
                              const GevreyCutoff& cutoff, int j_max, int n_max,
                              double alias_tol = 1e-8);

/// V2: restriction of V1 to |j| <= ceil(logT^sigma), |n| <= ceil(T*logT^sigma).
class TruncatedPotential {
 public:
  const SpaceTimeField& table() const { return table_; }
  double T() const { return table_.period_scale(); }
  int k_x() const { return k_x_; }
  int k_t() const { return k_t_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  /// sup |V1 - V2| measured on the sample grid at build time
  double measured_gap() const { return measured_gap_; }
  double eval(double x, double t) const { return eval_table(table_, x, t); }

 private:
  friend TruncatedPotential truncate(const PeriodizedPotential&, double, double);
  SpaceTimeField table_;
  int k_x_ = 0, k_t_ = 0;
  double sigma_ = 0.0, delta_ = 0.0, measured_gap_ = 0.0;
};

TruncatedPotential truncate(const PeriodizedPotential& V1, double sigma,
                            double delta);

/// Fitted exponential-decay certificates for a V1 table (the constants are
/// fitted, not asserted; ok flags report whether genuine decay was found).
struct DecayReport {
  double C_x = 0.0, c_x = 0.0;  // |V1(j,n)| <= C_x e^{-c_x |j|}, |j| >= j_onset
  double C_n = 0.0, c_n = 0.0;  // |V1(j,n)| <= C_n e^{-c_n |n/T|^{1/alpha}}
  int j_onset = 0, n_onset = 0;
  bool x_ok = false, n_ok = false;
};

DecayReport decay_audit(const PeriodizedPotential& V1, double alpha, double delta);

}  // namespace floq
