#include "floq/eigh.hpp"

#include <lapacke.h>

#include <stdexcept>
#include <string>

namespace floq::detail {

namespace {
void check(int info, const char* who) {
  if (info != 0)
    throw std::runtime_error(std::string(who) + " failed, info=" +
                             std::to_string(info));
}
}  // namespace

void eigh_real_inplace(int n, std::vector<double>& a, std::vector<double>& w) {
  if (static_cast<long long>(n) * n != static_cast<long long>(a.size()))
    throw std::invalid_argument("eigh_real_inplace: size mismatch");
  w.assign(n, 0.0);
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data()),
        "dsyevd");
}

void eigh_real(int n, const std::vector<double>& a, std::vector<double>& w,
               std::vector<double>& z) {
  if (static_cast<long long>(n) * n != static_cast<long long>(a.size()))
    throw std::invalid_argument("eigh_real: size mismatch");
  std::vector<double> ac = a;
  w.assign(n, 0.0);
  z.assign(static_cast<size_t>(n) * n, 0.0);
  std::vector<lapack_int> isuppz(2 * std::max(1, n));
  lapack_int m = 0;
  check(LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, ac.data(), n, 0.0,
                       0.0, 0, 0, 0.0, &m, w.data(), z.data(), n,
                       isuppz.data()),
        "dsyevr");
  if (m != n) throw std::runtime_error("dsyevr: incomplete spectrum");
}

void eigh_complex_inplace(int n, std::vector<std::complex<double>>& a,
                          std::vector<double>& w) {
  if (static_cast<long long>(n) * n != static_cast<long long>(a.size()))
    throw std::invalid_argument("eigh_complex_inplace: size mismatch");
  w.assign(n, 0.0);
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                       reinterpret_cast<lapack_complex_double*>(a.data()), n,
                       w.data()),
        "zheevd");
}

}  // namespace floq::detail
