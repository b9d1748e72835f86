#pragma once

#include <complex>
#include <span>
#include <vector>

namespace floq {

using cd = std::complex<double>;

/// A function on the circle [-pi, pi), held as Fourier coefficients
/// u(x) = sum_{|j| <= j_max} c(j) e^{ijx}. Immutable by convention after
/// construction/population; all free operations return new fields.
class TorusField {
 public:
  TorusField() = default;
  explicit TorusField(int j_max);

  int j_max() const { return j_max_; }
  cd coeff(int j) const;          // zero outside the band
  void set_coeff(int j, cd v);    // throws outside the band
  std::span<const cd> raw() const { return coeffs_; }
  std::span<cd> raw_mut() { return coeffs_; }

  /// Samples u on the uniform grid x_m = -pi + 2*pi*m/n, n > 2*j_max.
  std::vector<cd> to_grid(int n) const;
  /// Builds a field from grid samples; j_max = n/2 - 1 (Nyquist bin dropped).
  static TorusField from_grid(const std::vector<cd>& grid);

 private:
  int j_max_ = 0;
  std::vector<cd> coeffs_;  // index j + j_max
};

/// Sobolev norm with Japanese-bracket weights:
/// ( sum_j (1+j^2)^s |c(j)|^2 )^{1/2}. Equals the L^2 norm at s = 0.
double hs_norm(const TorusField& u, double s);
double l2_norm(const TorusField& u);

/// Smoothed frequency cutoff: 1 on |j| <= J/2, 2(1-|j|/J) on J/2 <= |j| <= J,
/// 0 beyond. J must be even and >= 2.
struct MultiplierProfile {
  int J;
  double value(int j) const;
};

TorusField apply_multiplier(const TorusField& u, int J);

/// Dyadic annulus slice: keeps exactly the modes with R/4 < |k| < 4R
/// (open bounds). R must be a power of two.
TorusField dyadic_slice(const TorusField& u, int R);

/// A function on the space-time torus [-pi,pi) x [-pi T, pi T), held as
/// coefficients over the rectangle |j| <= j_max, |n| <= n_max.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;
  SpaceTimeField(int j_max, int n_max, double period_scale);

  int j_max() const { return j_max_; }
  int n_max() const { return n_max_; }
  double period_scale() const { return period_scale_; }  // T; time period 2*pi*T
  cd coeff(int j, int n) const;
  void set_coeff(int j, int n, cd v);
  std::span<const cd> raw() const { return coeffs_; }
  double l2_norm() const;

 private:
  int j_max_ = 0, n_max_ = 0;
  double period_scale_ = 1.0;
  std::vector<cd> coeffs_;  // index (j + j_max)*(2*n_max+1) + (n + n_max)
};

/// Places u0 on the n = 0 row: out(j,0) = u0(j), all other rows zero.
/// Throws if u0 carries mass beyond the target band.
SpaceTimeField embed_initial(const TorusField& u0, double T, int j_max, int n_max);

}  // namespace floq
