#include "floq/torus_field.hpp"

#include <cmath>
#include <stdexcept>

#include "floq/fft.hpp"

namespace floq {

TorusField::TorusField(int j_max) : j_max_(j_max) {
  if (j_max < 0) throw std::invalid_argument("TorusField: j_max must be >= 0");
  coeffs_.assign(2 * j_max + 1, cd(0.0, 0.0));
}

cd TorusField::coeff(int j) const {
  if (std::abs(j) > j_max_) return cd(0.0, 0.0);
  return coeffs_[j + j_max_];
}

void TorusField::set_coeff(int j, cd v) {
  if (std::abs(j) > j_max_)
    throw std::invalid_argument("TorusField::set_coeff: frequency outside band");
  coeffs_[j + j_max_] = v;
}

std::vector<cd> TorusField::to_grid(int n) const {
  if (n <= 2 * j_max_)
    throw std::invalid_argument("TorusField::to_grid: grid too small for band");
  std::vector<cd> spec(n, cd(0.0, 0.0));
  // Grid starts at x = -pi, so mode j picks up the phase e^{-i j pi} = (-1)^j.
  for (int j = -j_max_; j <= j_max_; ++j) {
    int k = j >= 0 ? j : j + n;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    spec[k] = coeffs_[j + j_max_] * sign;
  }
  fft::inverse(spec);
  return spec;
}

TorusField TorusField::from_grid(const std::vector<cd>& grid) {
  std::vector<cd> spec = grid;
  fft::forward(spec);
  int n = static_cast<int>(grid.size());
  TorusField out(n / 2 - 1);
  for (int j = -out.j_max_; j <= out.j_max_; ++j) {
    int k = j >= 0 ? j : j + n;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    out.coeffs_[j + out.j_max_] = spec[k] * sign;
  }
  return out;
}

double hs_norm(const TorusField& u, double s) {
  if (s < 0) throw std::invalid_argument("hs_norm: s must be >= 0");
  double acc = 0.0;
  for (int j = -u.j_max(); j <= u.j_max(); ++j) {
    double w = std::pow(1.0 + static_cast<double>(j) * j, s);
    acc += w * std::norm(u.coeff(j));
  }
  return std::sqrt(acc);
}

double l2_norm(const TorusField& u) { return hs_norm(u, 0.0); }

double MultiplierProfile::value(int j) const {
  if (J < 2 || J % 2 != 0)
    throw std::invalid_argument("MultiplierProfile: J must be even and >= 2");
  double a = std::abs(j);
  if (a <= J / 2.0) return 1.0;
  if (a > J) return 0.0;
  return 2.0 * (1.0 - a / J);
}

TorusField apply_multiplier(const TorusField& u, int J) {
  MultiplierProfile prof{J};
  TorusField out(u.j_max());
  for (int j = -u.j_max(); j <= u.j_max(); ++j)
    out.set_coeff(j, u.coeff(j) * prof.value(j));
  return out;
}

TorusField dyadic_slice(const TorusField& u, int R) {
  if (R < 1 || (R & (R - 1)) != 0)
    throw std::invalid_argument("dyadic_slice: R must be a power of two");
  TorusField out(u.j_max());
  for (int k = -u.j_max(); k <= u.j_max(); ++k) {
    double a = std::abs(k);
    if (4.0 * a > R && a < 4.0 * R) out.set_coeff(k, u.coeff(k));
  }
  return out;
}

SpaceTimeField::SpaceTimeField(int j_max, int n_max, double period_scale)
    : j_max_(j_max), n_max_(n_max), period_scale_(period_scale) {
  if (j_max < 0 || n_max < 0)
    throw std::invalid_argument("SpaceTimeField: extents must be >= 0");
  if (period_scale <= 0)
    throw std::invalid_argument("SpaceTimeField: period scale must be > 0");
  coeffs_.assign(static_cast<size_t>(2 * j_max + 1) * (2 * n_max + 1), cd(0.0, 0.0));
}

cd SpaceTimeField::coeff(int j, int n) const {
  if (std::abs(j) > j_max_ || std::abs(n) > n_max_) return cd(0.0, 0.0);
  return coeffs_[static_cast<size_t>(j + j_max_) * (2 * n_max_ + 1) + (n + n_max_)];
}

void SpaceTimeField::set_coeff(int j, int n, cd v) {
  if (std::abs(j) > j_max_ || std::abs(n) > n_max_)
    throw std::invalid_argument("SpaceTimeField::set_coeff: outside rectangle");
  coeffs_[static_cast<size_t>(j + j_max_) * (2 * n_max_ + 1) + (n + n_max_)] = v;
}

double SpaceTimeField::l2_norm() const {
  double acc = 0.0;
  for (const auto& v : coeffs_) acc += std::norm(v);
  return std::sqrt(acc);
}

SpaceTimeField embed_initial(const TorusField& u0, double T, int j_max, int n_max) {
  for (int j = -u0.j_max(); j <= u0.j_max(); ++j) {
    if (std::abs(j) > j_max && u0.coeff(j) != cd(0.0, 0.0))
      throw std::invalid_argument(
          "embed_initial: initial band limit " + std::to_string(u0.j_max()) +
          " exceeds target rectangle band " + std::to_string(j_max));
  }
  SpaceTimeField out(j_max, n_max, T);
  for (int j = -std::min(u0.j_max(), j_max); j <= std::min(u0.j_max(), j_max); ++j)
    out.set_coeff(j, 0, u0.coeff(j));
  return out;
}

}  // namespace floq
