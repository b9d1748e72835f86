#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace floq {

/// Scale convention for all (log T)^sigma style parameter formulas. Base-10
/// keeps the derived lattice extents, resonance thresholds and shell widths
/// in sensible ranges at the T values this toolkit targets (T ~ 8..64).
inline double log_scale(double T) {
  if (T <= 1.0) throw std::invalid_argument("log_scale: requires T > 1");
  return std::log10(T);
}

/// Exponent pack (alpha, delta, sigma', sigma, A) with the ordering
/// sigma > sigma' > 2*alpha + delta > 2 enforced at load.
struct ParamPack {
  double alpha = 1.1;        // Gevrey order of the time cutoff
  double delta = 0.2;        // decay onset exponent
  double sigma_prime = 2.5;  // intermediate exponent
  double sigma = 3.0;        // truncation / lattice exponent
  double A = 2.0;            // lattice n-extent factor

  void validate() const {
    if (alpha <= 1.0) throw std::invalid_argument("ParamPack: alpha must be > 1");
    if (A <= 1.0) throw std::invalid_argument("ParamPack: A must be > 1");
    if (!(sigma > sigma_prime))
      throw std::invalid_argument("ParamPack: requires sigma > sigma'");
    if (!(sigma_prime > 2.0 * alpha + delta))
      throw std::invalid_argument("ParamPack: requires sigma' > 2*alpha + delta");
    if (!(2.0 * alpha + delta > 2.0))
      throw std::invalid_argument("ParamPack: requires 2*alpha + delta > 2");
  }
};

/// Named packs exposed on the CLI via --params.
inline ParamPack param_pack(const std::string& name) {
  if (name == "default") return ParamPack{};
  if (name == "wide") return ParamPack{1.2, 0.3, 2.8, 3.4, 2.0};
  throw std::invalid_argument("unknown parameter pack: " + name);
}

}  // namespace floq
