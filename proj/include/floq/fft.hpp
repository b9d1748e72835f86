#pragma once

#include <complex>
#include <vector>

namespace floq::fft {

using cd = std::complex<double>;

/// Forward DFT with 1/N normalization:
///   out[k] = (1/N) * sum_m in[m] e^{-2*pi*i*k*m/N}.
/// With this convention Parseval reads: sum_k |out[k]|^2 = mean_m |in[m]|^2.
void forward(std::vector<cd>& a);

/// Unnormalized inverse DFT: out[m] = sum_k a[k] e^{+2*pi*i*k*m/N}.
/// Exact inverse of forward().
void inverse(std::vector<cd>& a);

/// 2-D forward DFT (row-major, n0 x n1) with 1/(n0*n1) normalization.
void forward_2d(std::vector<cd>& a, int n0, int n1);

int next_pow2(int n);

/// Frequency of bin k in an N-point transform (k in [0,N)).
inline int bin_freq(int k, int n) { return k <= n / 2 ? k : k - n; }

}  // namespace floq::fft
