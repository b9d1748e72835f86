#pragma once

#include <complex>
#include <vector>

namespace floq::detail {

/// Full eigendecomposition of a real symmetric matrix (column-major, n x n).
/// a is overwritten with the orthonormal eigenvectors (one per column),
/// w receives the ascending eigenvalues. Divide-and-conquer (dsyevd).
void eigh_real_inplace(int n, std::vector<double>& a, std::vector<double>& w);

/// Same, but keeps a intact and writes eigenvectors to z (MRRR, dsyevr);
/// roughly half the workspace of dsyevd at large n.
void eigh_real(int n, const std::vector<double>& a, std::vector<double>& w,
               std::vector<double>& z);

/// Full eigendecomposition of a complex Hermitian matrix, in place (zheevd).
void eigh_complex_inplace(int n, std::vector<std::complex<double>>& a,
                          std::vector<double>& w);

}  // namespace floq::detail
