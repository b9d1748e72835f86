#include "floq/floquet.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "floq/eigh.hpp"
#include "floq/errors.hpp"

extern "C" {
void dgemv_(const char* trans, const int* m, const int* n, const double* alpha,
            const double* a, const int* lda, const double* x, const int* incx,
            const double* beta, double* y, const int* incy);
}

namespace floq {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

// y = op(Z) x for column-major Z (rows x cols)
void gemv(bool transpose, int rows, int cols, const double* z, const double* x,
          double* y) {
  const char t = transpose ? 'T' : 'N';
  const double one = 1.0, zero = 0.0;
  const int inc = 1;
  dgemv_(&t, &rows, &cols, &one, z, &rows, x, &inc, &zero, y, &inc);
}

}  // namespace

Lattice Lattice::make(double T, int J_cap, double A, double sigma) {
  Lattice lat;
  lat.T = T;
  lat.J_cap = J_cap;
  lat.A = A;
  lat.sigma = sigma;
  lat.N_cap = static_cast<int>(std::floor(A * T * std::pow(log_scale(T), sigma)));
  lat.validate();
  return lat;
}

void Lattice::validate() const {
  if (T <= 1.0) throw std::invalid_argument("Lattice: requires T > 1");
  if (A <= 1.0) throw std::invalid_argument("Lattice: requires A > 1");
  if (sigma <= 1.0) throw std::invalid_argument("Lattice: requires sigma > 1");
  if (J_cap < 0 || N_cap < 0)
    throw std::invalid_argument("Lattice: extents must be nonnegative");
}

FloquetOperator::FloquetOperator(SpaceTimeField kernel, Lattice lattice)
    : kernel_(std::move(kernel)), lattice_(lattice) {
  lattice_.validate();
  double herm_defect = 0.0, max_imag = 0.0, even_defect = 0.0;
  kernel_abs_sum_ = 0.0;
  for (int j = -kernel_.j_max(); j <= kernel_.j_max(); ++j)
    for (int n = -kernel_.n_max(); n <= kernel_.n_max(); ++n) {
      cd c = kernel_.coeff(j, n);
      herm_defect = std::max(herm_defect,
                             std::abs(c - std::conj(kernel_.coeff(-j, -n))));
      max_imag = std::max(max_imag, std::abs(c.imag()));
      even_defect = std::max(even_defect, std::abs(c - kernel_.coeff(-j, n)));
      kernel_abs_sum_ += std::abs(c);
    }
  if (herm_defect > 1e-12)
    throw std::invalid_argument(
        "FloquetOperator: kernel is not Hermitian-symmetric (defect " +
        std::to_string(herm_defect) + "); the potential must be real");
  kernel_real_ = max_imag <= 1e-13;
  kernel_even_j_ = even_defect <= 1e-13;
}

cd FloquetOperator::entry(int j, int n, int jp, int np) const {
  if (!lattice_.contains(j, n) || !lattice_.contains(jp, np)) return cd(0, 0);
  cd v = kernel_.coeff(j - jp, n - np);
  if (j == jp && n == np) v += lattice_.diag(j, n);
  return v;
}

void FloquetOperator::apply(const std::vector<cd>& x, std::vector<cd>& y) const {
  const Lattice& lat = lattice_;
  if (static_cast<long>(x.size()) != lat.site_count())
    throw std::invalid_argument("FloquetOperator::apply: size mismatch");
  y.assign(x.size(), cd(0, 0));
  const int kx = kernel_.j_max(), kt = kernel_.n_max();
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j)
    for (int n = -lat.N_cap; n <= lat.N_cap; ++n) {
      cd acc = lat.diag(j, n) * x[lat.index(j, n)];
      for (int dj = -kx; dj <= kx; ++dj) {
        int jp = j - dj;
        if (std::abs(jp) > lat.J_cap) continue;
        for (int dn = -kt; dn <= kt; ++dn) {
          int np = n - dn;
          if (std::abs(np) > lat.N_cap) continue;
          cd c = kernel_.coeff(dj, dn);
          if (c != cd(0, 0)) acc += c * x[lat.index(jp, np)];
        }
      }
      y[lat.index(j, n)] = acc;
    }
}

double FloquetOperator::trace() const {
  double acc = 0.0;
  for (int j = -lattice_.J_cap; j <= lattice_.J_cap; ++j)
    for (int n = -lattice_.N_cap; n <= lattice_.N_cap; ++n)
      acc += lattice_.diag(j, n);
  return acc + static_cast<double>(lattice_.site_count()) *
                   kernel_.coeff(0, 0).real();
}

void FloquetOperator::export_triplets(std::ostream& os) const {
  os << "# floq-triplets v1\n";
  os << "# j n j' n' re im  (upper triangle by site index, Hermitian)\n";
  char buf[160];
  const Lattice& lat = lattice_;
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j)
    for (int n = -lat.N_cap; n <= lat.N_cap; ++n) {
      long r = lat.index(j, n);
      const int kx = kernel_.j_max(), kt = kernel_.n_max();
      for (int dj = -kx; dj <= kx; ++dj)
        for (int dn = -kt; dn <= kt; ++dn) {
          int jp = j - dj, np = n - dn;
          if (!lat.contains(jp, np)) continue;
          if (lat.index(jp, np) < r) continue;
          cd v = entry(j, n, jp, np);
          if (v == cd(0, 0)) continue;
          std::snprintf(buf, sizeof buf, "%d %d %d %d %.17g %.17g\n", j, n, jp,
                        np, v.real(), v.imag());
          os << buf;
        }
    }
}

FloquetOperator assemble(const TruncatedPotential& V2, const Lattice& lattice) {
  if (std::abs(V2.T() - lattice.T) > 1e-12)
    throw std::invalid_argument("assemble: potential and lattice disagree on T");
  return FloquetOperator(V2.table(), lattice);
}

long Spectrum::block_row(const Block& b, int j, int n) const {
  return static_cast<long>(j - b.j_lo) * (2 * lattice_.N_cap + 1) +
         (n + lattice_.N_cap);
}

int Spectrum::count() const {
  switch (storage_) {
    case Storage::Blocks:
      return static_cast<int>(order_.size());
    case Storage::PartialVecs:
      return static_cast<int>(partial_.size());
    default:
      return static_cast<int>(evals_.size());
  }
}

double Spectrum::eigenvalue(int k) const {
  if (k < 0 || k >= count()) throw std::out_of_range("Spectrum::eigenvalue");
  if (storage_ == Storage::Blocks) {
    auto [b, c] = order_[k];
    return blocks_[b].evals[c];
  }
  return evals_[k];
}

std::vector<cd> Spectrum::vector(int k) const {
  if (k < 0 || k >= count()) throw std::out_of_range("Spectrum::vector");
  const long sites = lattice_.site_count();
  std::vector<cd> out(sites, cd(0, 0));
  switch (storage_) {
    case Storage::Blocks: {
      auto [bi, c] = order_[k];
      const Block& b = blocks_[bi];
      const double* col = b.vecs.data() + static_cast<size_t>(c) * b.dim;
      for (int j = b.j_lo; j <= lattice_.J_cap; ++j)
        for (int n = -lattice_.N_cap; n <= lattice_.N_cap; ++n) {
          double v = col[block_row(b, j, n)];
          if (j == 0) {
            out[lattice_.index(0, n)] = v;
          } else {
            out[lattice_.index(j, n)] = v * kSqrtHalf;
            out[lattice_.index(-j, n)] = b.parity * v * kSqrtHalf;
          }
        }
      return out;
    }
    case Storage::FullReal: {
      const double* col = vecs_real_.data() + static_cast<size_t>(k) * sites;
      for (long i = 0; i < sites; ++i) out[i] = col[i];
      return out;
    }
    case Storage::FullComplex: {
      const cd* col = vecs_complex_.data() + static_cast<size_t>(k) * sites;
      std::copy(col, col + sites, out.begin());
      return out;
    }
    case Storage::PartialVecs:
      return partial_[k];
  }
  return out;
}

void Spectrum::shell_mass(int k, std::vector<double>& out) const {
  const int J = lattice_.J_cap, nrow = 2 * lattice_.N_cap + 1;
  out.assign(static_cast<size_t>(J + 1) * nrow, 0.0);
  if (storage_ == Storage::Blocks) {
    auto [bi, c] = order_[k];
    const Block& b = blocks_[bi];
    const double* col = b.vecs.data() + static_cast<size_t>(c) * b.dim;
    for (int j = b.j_lo; j <= J; ++j)
      for (int in = 0; in < nrow; ++in) {
        double v = col[static_cast<long>(j - b.j_lo) * nrow + in];
        out[static_cast<size_t>(j) * nrow + in] = v * v;
      }
    return;
  }
  std::vector<cd> v = vector(k);
  for (int j = -J; j <= J; ++j)
    for (int n = -lattice_.N_cap; n <= lattice_.N_cap; ++n)
      out[static_cast<size_t>(std::abs(j)) * nrow + (n + lattice_.N_cap)] +=
          std::norm(v[lattice_.index(j, n)]);
}

std::vector<cd> Spectrum::project(const std::vector<cd>& x) const {
  const long sites = lattice_.site_count();
  if (static_cast<long>(x.size()) != sites)
    throw std::invalid_argument("Spectrum::project: size mismatch");
  std::vector<cd> coeffs(count(), cd(0, 0));
  switch (storage_) {
    case Storage::Blocks: {
      const int nrow = 2 * lattice_.N_cap + 1;
      std::vector<std::vector<cd>> per_block(blocks_.size());
      for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& b = blocks_[bi];
        std::vector<double> xr(b.dim), xi(b.dim);
        for (int j = b.j_lo; j <= lattice_.J_cap; ++j)
          for (int n = -lattice_.N_cap; n <= lattice_.N_cap; ++n) {
            cd v;
            if (j == 0)
              v = x[lattice_.index(0, n)];
            else
              v = kSqrtHalf * (x[lattice_.index(j, n)] +
                               static_cast<double>(b.parity) *
                                   x[lattice_.index(-j, n)]);
            long r = block_row(b, j, n);
            xr[r] = v.real();
            xi[r] = v.imag();
          }
        std::vector<double> cr(b.dim), ci(b.dim);
        gemv(true, b.dim, b.dim, b.vecs.data(), xr.data(), cr.data());
        gemv(true, b.dim, b.dim, b.vecs.data(), xi.data(), ci.data());
        per_block[bi].resize(b.dim);
        for (int c = 0; c < b.dim; ++c) per_block[bi][c] = cd(cr[c], ci[c]);
      }
      for (size_t k = 0; k < order_.size(); ++k) {
        auto [bi, c] = order_[k];
        coeffs[k] = per_block[bi][c];
      }
      (void)nrow;
      return coeffs;
    }
    case Storage::FullReal: {
      std::vector<double> xr(sites), xi(sites);
      for (long i = 0; i < sites; ++i) {
        xr[i] = x[i].real();
        xi[i] = x[i].imag();
      }
      std::vector<double> cr(sites), ci(sites);
      int n = static_cast<int>(sites);
      gemv(true, n, n, vecs_real_.data(), xr.data(), cr.data());
      gemv(true, n, n, vecs_real_.data(), xi.data(), ci.data());
      for (long k = 0; k < sites; ++k) coeffs[k] = cd(cr[k], ci[k]);
      return coeffs;
    }
    default: {
      for (int k = 0; k < count(); ++k) {
        std::vector<cd> v = vector(k);
        cd acc(0, 0);
        for (long i = 0; i < sites; ++i) acc += std::conj(v[i]) * x[i];
        coeffs[k] = acc;
      }
      return coeffs;
    }
  }
}

std::vector<cd> Spectrum::synthesize(const std::vector<cd>& coeffs) const {
  if (static_cast<int>(coeffs.size()) != count())
    throw std::invalid_argument("Spectrum::synthesize: size mismatch");
  const long sites = lattice_.site_count();
  std::vector<cd> out(sites, cd(0, 0));
  switch (storage_) {
    case Storage::Blocks: {
      for (size_t bi = 0; bi < blocks_.size(); ++bi) {
        const Block& b = blocks_[bi];
        std::vector<double> cr(b.dim, 0.0), ci(b.dim, 0.0);
        for (size_t k = 0; k < order_.size(); ++k) {
          if (order_[k].first != static_cast<int>(bi)) continue;
          cr[order_[k].second] = coeffs[k].real();
          ci[order_[k].second] = coeffs[k].imag();
        }
        std::vector<double> yr(b.dim), yi(b.dim);
        gemv(false, b.dim, b.dim, b.vecs.data(), cr.data(), yr.data());
        gemv(false, b.dim, b.dim, b.vecs.data(), ci.data(), yi.data());
        for (int j = b.j_lo; j <= lattice_.J_cap; ++j)
          for (int n = -lattice_.N_cap; n <= lattice_.N_cap; ++n) {
            long r = block_row(b, j, n);
            cd v(yr[r], yi[r]);
            if (j == 0) {
              out[lattice_.index(0, n)] += v;
            } else {
              out[lattice_.index(j, n)] += v * kSqrtHalf;
              out[lattice_.index(-j, n)] +=
                  static_cast<double>(b.parity) * v * kSqrtHalf;
            }
          }
      }
      return out;
    }
    case Storage::FullReal: {
      std::vector<double> cr(sites), ci(sites);
      for (long k = 0; k < sites; ++k) {
        cr[k] = coeffs[k].real();
        ci[k] = coeffs[k].imag();
      }
      std::vector<double> yr(sites), yi(sites);
      int n = static_cast<int>(sites);
      gemv(false, n, n, vecs_real_.data(), cr.data(), yr.data());
      gemv(false, n, n, vecs_real_.data(), ci.data(), yi.data());
      for (long i = 0; i < sites; ++i) out[i] = cd(yr[i], yi[i]);
      return out;
    }
    default: {
      for (int k = 0; k < count(); ++k) {
        if (coeffs[k] == cd(0, 0)) continue;
        std::vector<cd> v = vector(k);
        for (long i = 0; i < sites; ++i) out[i] += coeffs[k] * v[i];
      }
      return out;
    }
  }
}

struct SpectrumBuilder {
  static Spectrum make_base(const FloquetOperator& H);
  static Spectrum solve_blocks(const FloquetOperator& H);
  static Spectrum solve_full_real(const FloquetOperator& H);
  static Spectrum solve_full_complex(const FloquetOperator& H);
  static Spectrum solve_shift_invert(const FloquetOperator& H,
                                     const EigOptions& opts);
};

Spectrum eigensolve(const FloquetOperator& H, const EigOptions& opts) {
  const long sites = H.lattice().site_count();
  if (sites <= opts.dense_budget) {
    if (H.kernel_real() && H.kernel_even_j())
      return SpectrumBuilder::solve_blocks(H);
    if (H.kernel_real()) return SpectrumBuilder::solve_full_real(H);
    if (sites <= 10000) return SpectrumBuilder::solve_full_complex(H);
  }
  return SpectrumBuilder::solve_shift_invert(H, opts);
}

Spectrum SpectrumBuilder::make_base(const FloquetOperator& H) {
  Spectrum s;
  s.lattice_ = H.lattice();
  return s;
}

Spectrum SpectrumBuilder::solve_blocks(const FloquetOperator& H) {
  Spectrum s = make_base(H);
  s.storage_ = Spectrum::Storage::Blocks;
  s.complete_ = true;
  const Lattice& lat = H.lattice();
  const auto& ker = H.kernel();
  const int J = lat.J_cap, N = lat.N_cap, nrow = 2 * N + 1;
  auto K = [&](int dj, int dn) { return ker.coeff(dj, dn).real(); };

  for (int parity : {+1, -1}) {
    Spectrum::Block b;
    b.parity = parity;
    b.j_lo = parity == 1 ? 0 : 1;
    b.dim = (J - b.j_lo + 1) * nrow;
    if (b.dim == 0) continue;
    std::vector<double> a(static_cast<size_t>(b.dim) * b.dim, 0.0);
    for (int jp = b.j_lo; jp <= J; ++jp)
      for (int np = -N; np <= N; ++np) {
        long col = static_cast<long>(jp - b.j_lo) * nrow + (np + N);
        double* acol = a.data() + static_cast<size_t>(col) * b.dim;
        for (int j = b.j_lo; j <= J; ++j) {
          int dn_lo = std::max(-N - np, -ker.n_max());
          int dn_hi = std::min(N - np, ker.n_max());
          for (int dn = dn_lo; dn <= dn_hi; ++dn) {
            int n = np + dn;
            double v;
            if (j == 0 && jp == 0)
              v = K(0, dn);
            else if (j == 0)
              v = std::sqrt(2.0) * K(jp, dn);
            else if (jp == 0)
              v = std::sqrt(2.0) * K(j, dn);
            else
              v = K(j - jp, dn) + parity * K(j + jp, dn);
            if (v != 0.0)
              acol[static_cast<long>(j - b.j_lo) * nrow + (n + N)] += v;
          }
          if (j == jp)
            acol[static_cast<long>(j - b.j_lo) * nrow + (np + N)] +=
                lat.diag(jp, np);
        }
      }
    detail::eigh_real_inplace(b.dim, a, b.evals);
    b.vecs = std::move(a);
    s.blocks_.push_back(std::move(b));
  }

  // global ascending eigenvalue order across blocks
  for (size_t bi = 0; bi < s.blocks_.size(); ++bi)
    for (int c = 0; c < s.blocks_[bi].dim; ++c)
      s.order_.emplace_back(static_cast<int>(bi), c);
  std::sort(s.order_.begin(), s.order_.end(), [&](auto lhs, auto rhs) {
    return s.blocks_[lhs.first].evals[lhs.second] <
           s.blocks_[rhs.first].evals[rhs.second];
  });
  return s;
}

Spectrum SpectrumBuilder::solve_full_real(const FloquetOperator& H) {
  Spectrum s = make_base(H);
  s.storage_ = Spectrum::Storage::FullReal;
  s.complete_ = true;
  const Lattice& lat = H.lattice();
  const int n = static_cast<int>(lat.site_count());
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (int jp = -lat.J_cap; jp <= lat.J_cap; ++jp)
    for (int np = -lat.N_cap; np <= lat.N_cap; ++np) {
      long col = lat.index(jp, np);
      double* acol = a.data() + static_cast<size_t>(col) * n;
      for (int dj = -H.kernel().j_max(); dj <= H.kernel().j_max(); ++dj)
        for (int dn = -H.kernel().n_max(); dn <= H.kernel().n_max(); ++dn) {
          int j = jp + dj, nn = np + dn;
          if (!lat.contains(j, nn)) continue;
          acol[lat.index(j, nn)] += H.kernel().coeff(dj, dn).real();
        }
      acol[col] += lat.diag(jp, np);
    }
  detail::eigh_real(n, a, s.evals_, s.vecs_real_);
  a.clear();
  return s;
}

Spectrum SpectrumBuilder::solve_full_complex(const FloquetOperator& H) {
  Spectrum s = make_base(H);
  s.storage_ = Spectrum::Storage::FullComplex;
  s.complete_ = true;
  const Lattice& lat = H.lattice();
  const int n = static_cast<int>(lat.site_count());
  std::vector<cd> a(static_cast<size_t>(n) * n, cd(0, 0));
  for (int jp = -lat.J_cap; jp <= lat.J_cap; ++jp)
    for (int np = -lat.N_cap; np <= lat.N_cap; ++np) {
      long col = lat.index(jp, np);
      cd* acol = a.data() + static_cast<size_t>(col) * n;
      for (int dj = -H.kernel().j_max(); dj <= H.kernel().j_max(); ++dj)
        for (int dn = -H.kernel().n_max(); dn <= H.kernel().n_max(); ++dn) {
          int j = jp + dj, nn = np + dn;
          if (!lat.contains(j, nn)) continue;
          acol[lat.index(j, nn)] += H.kernel().coeff(dj, dn);
        }
      acol[col] += lat.diag(jp, np);
    }
  detail::eigh_complex_inplace(n, a, s.evals_);
  s.vecs_complex_ = std::move(a);
  return s;
}

Spectrum SpectrumBuilder::solve_shift_invert(const FloquetOperator& H,
                                             const EigOptions& opts) {
  const Lattice& lat = H.lattice();
  const int n = static_cast<int>(lat.site_count());
  using SpMat = Eigen::SparseMatrix<cd>;
  SpMat A(n, n);
  {
    std::vector<Eigen::Triplet<cd>> trips;
    for (int jp = -lat.J_cap; jp <= lat.J_cap; ++jp)
      for (int np = -lat.N_cap; np <= lat.N_cap; ++np) {
        long col = lat.index(jp, np);
        for (int dj = -H.kernel().j_max(); dj <= H.kernel().j_max(); ++dj)
          for (int dn = -H.kernel().n_max(); dn <= H.kernel().n_max(); ++dn) {
            int j = jp + dj, nn = np + dn;
            if (!lat.contains(j, nn)) continue;
            cd v = H.kernel().coeff(dj, dn);
            if (dj == 0 && dn == 0) v += lat.diag(jp, np) - opts.shift;
            if (v != cd(0, 0))
              trips.emplace_back(static_cast<int>(lat.index(j, nn)),
                                 static_cast<int>(col), v);
          }
      }
    A.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error(
        "shift-invert: factorization of (H - shift I) failed; pick another shift");

  const int want = std::min(opts.iterative_pairs, n);
  const int m = std::min(n, std::max(2 * want + 20, 60));
  using Vec = Eigen::VectorXcd;
  std::vector<Vec> basis;
  basis.reserve(m);
  std::vector<double> alphas, betas;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(gauss(rng), gauss(rng));
  v.normalize();
  basis.push_back(v);

  // Lanczos on (H - shift)^{-1} with full reorthogonalization
  for (int it = 0; it < m; ++it) {
    Vec w = lu.solve(basis[it]);
    double alpha = std::real(basis[it].dot(w));
    alphas.push_back(alpha);
    w -= alpha * basis[it];
    if (it > 0) w -= betas[it - 1] * basis[it - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) w -= q.dot(w) * q;
    double beta = w.norm();
    if (beta < 1e-13 || it + 1 == m) break;
    betas.push_back(beta);
    basis.push_back(w / beta);
  }

  const int mm = static_cast<int>(alphas.size());
  std::vector<double> tri(static_cast<size_t>(mm) * mm, 0.0);
  for (int i = 0; i < mm; ++i) {
    tri[static_cast<size_t>(i) * mm + i] = alphas[i];
    if (i + 1 < mm) {
      tri[static_cast<size_t>(i) * mm + (i + 1)] = betas[i];
      tri[static_cast<size_t>(i + 1) * mm + i] = betas[i];
    }
  }
  std::vector<double> theta;
  detail::eigh_real_inplace(mm, tri, theta);

  struct Cand {
    double E;
    double res;
    std::vector<cd> x;
  };
  std::vector<Cand> cands;
  std::vector<cd> xv(n), hx(n);
  for (int c = 0; c < mm; ++c) {
    if (std::abs(theta[c]) < 1e-14) continue;
    Vec x = Vec::Zero(n);
    for (int i = 0; i < mm; ++i)
      x += tri[static_cast<size_t>(c) * mm + i] * basis[i];
    x.normalize();
    for (int i = 0; i < n; ++i) xv[i] = x[i];
    H.apply(xv, hx);
    cd ray(0, 0);
    for (int i = 0; i < n; ++i) ray += std::conj(xv[i]) * hx[i];
    double E = ray.real();
    double res = 0.0;
    for (int i = 0; i < n; ++i) res += std::norm(hx[i] - E * xv[i]);
    res = std::sqrt(res);
    double scale = 1.0 + std::abs(E);
    if (res <= std::max(opts.tol, 1e-8) * scale)
      cands.push_back({E, res, xv});
  }
  std::sort(cands.begin(), cands.end(), [&](const Cand& l, const Cand& r) {
    return std::abs(l.E - opts.shift) < std::abs(r.E - opts.shift);
  });
  if (static_cast<int>(cands.size()) > want) cands.resize(want);
  std::sort(cands.begin(), cands.end(),
            [](const Cand& l, const Cand& r) { return l.E < r.E; });

  Spectrum s = make_base(H);
  s.storage_ = Spectrum::Storage::PartialVecs;
  s.complete_ = false;
  for (auto& c : cands) {
    s.evals_.push_back(c.E);
    s.partial_.push_back(std::move(c.x));
  }
  return s;
}

std::vector<std::pair<int, int>> resonant_set(double E, const Lattice& lattice,
                                              double threshold) {
  if (threshold <= 0)
    throw std::invalid_argument("resonant_set: threshold must be > 0");
  std::vector<std::pair<int, int>> out;
  for (int j = -lattice.J_cap; j <= lattice.J_cap; ++j)
    for (int n = -lattice.N_cap; n <= lattice.N_cap; ++n)
      if (std::abs(lattice.diag(j, n) - E) <= threshold) out.emplace_back(j, n);
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LowFrequency:
      return "low-frequency";
    case Verdict::Traveling:
      return "traveling";
    default:
      return "fail";
  }
}

LocalizationReport localization_report(const Spectrum& spec,
                                       const Lattice& lattice, double sigma,
                                       double epsilon, bool exhaustive) {
  LocalizationReport rep;
  rep.epsilon = epsilon;
  const double lg = std::pow(log_scale(lattice.T), sigma);
  rep.omega0_radius = 4.0 * lattice.A * lg;
  rep.shell_halfwidth = static_cast<int>(std::floor(lg));
  rep.n_halfwidth = static_cast<int>(std::floor(lattice.T * lg));

  const int J = lattice.J_cap, N = lattice.N_cap, nrow = 2 * N + 1;
  const int j0_cut = std::min(J, static_cast<int>(std::floor(rep.omega0_radius)));
  std::vector<double> prof;
  std::vector<double> group(nrow + 1);

  for (int k = 0; k < spec.count(); ++k) {
    spec.shell_mass(k, prof);
    double total = 0.0;
    for (double p : prof) total += p;
    if (total <= 0.0) total = 1.0;

    LocalizationEntry e;
    e.E = spec.eigenvalue(k);
    double in0 = 0.0;
    for (int a = 0; a <= j0_cut; ++a)
      for (int in = 0; in < nrow; ++in)
        in0 += prof[static_cast<size_t>(a) * nrow + in];
    e.mass_outside_omega0 = std::max(0.0, 1.0 - in0 / total);

    // top-mass shell site
    int a_star = 0, n_star = 0;
    double best = -1.0;
    for (int a = 0; a <= J; ++a)
      for (int in = 0; in < nrow; ++in) {
        double p = prof[static_cast<size_t>(a) * nrow + in];
        if (p > best) {
          best = p;
          a_star = a;
          n_star = in - N;
        }
      }

    int a_lo = exhaustive ? 0 : std::max(0, a_star - rep.shell_halfwidth);
    int a_hi = exhaustive ? J : std::min(J, a_star + rep.shell_halfwidth);
    double best_in = -1.0;
    for (int a0 = a_lo; a0 <= a_hi; ++a0) {
      // prefix sums of the shell-group mass sum_{||j|-a0| <= w} prof(|j|, n)
      group[0] = 0.0;
      for (int in = 0; in < nrow; ++in) {
        double g = 0.0;
        for (int a = std::max(0, a0 - rep.shell_halfwidth);
             a <= std::min(J, a0 + rep.shell_halfwidth); ++a)
          g += prof[static_cast<size_t>(a) * nrow + in];
        group[in + 1] = group[in] + g;
      }
      int n_lo = exhaustive ? -N : std::max(-N, n_star - rep.n_halfwidth);
      int n_hi = exhaustive ? N : std::min(N, n_star + rep.n_halfwidth);
      for (int n0 = n_lo; n0 <= n_hi; ++n0) {
        int wlo = std::max(0, n0 - rep.n_halfwidth + N);
        int whi = std::min(nrow, n0 + rep.n_halfwidth + N + 1);
        double in_mass = group[whi] - group[wlo];
        if (in_mass > best_in) {
          best_in = in_mass;
          e.best_j0 = a0;
          e.best_n0 = n0;
        }
      }
    }
    e.mass_outside_best_omega_prime = std::max(0.0, 1.0 - best_in / total);

    if (e.mass_outside_omega0 <= epsilon)
      e.verdict = Verdict::LowFrequency;
    else if (e.mass_outside_best_omega_prime <= epsilon)
      e.verdict = Verdict::Traveling;
    else {
      e.verdict = Verdict::Fail;
      ++rep.n_fail;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

FloquetSolution floquet_solution(const Spectrum& spec, int k,
                                 const LocalizationEntry& loc,
                                 const LocalizationReport& report,
                                 const SpaceTimeField& v1_table) {
  if (loc.verdict == Verdict::Fail)
    throw std::invalid_argument(
        "floquet_solution: eigenpair failed the localization dichotomy");
  const Lattice& lat = spec.lattice();
  std::vector<cd> xi = spec.vector(k);

  FloquetSolution sol;
  sol.E = loc.E;
  sol.xi_restricted = SpaceTimeField(lat.J_cap, lat.N_cap, lat.T);
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j)
    for (int n = -lat.N_cap; n <= lat.N_cap; ++n) {
      bool keep;
      if (loc.verdict == Verdict::LowFrequency)
        keep = std::abs(j) <= report.omega0_radius;
      else
        keep = std::abs(std::abs(j) - loc.best_j0) <= report.shell_halfwidth &&
               std::abs(n - loc.best_n0) <= report.n_halfwidth;
      if (keep) sol.xi_restricted.set_coeff(j, n, xi[lat.index(j, n)]);
    }

  // Defect of the truncated wave against the V1 dynamics, assembled on the
  // enlarged rectangle reached by the V1 convolution.
  const int Jx = lat.J_cap + v1_table.j_max();
  const int Nx = lat.N_cap + v1_table.n_max();
  SpaceTimeField w(Jx, Nx, lat.T);
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j)
    for (int n = -lat.N_cap; n <= lat.N_cap; ++n) {
      cd xv = sol.xi_restricted.coeff(j, n);
      if (xv == cd(0, 0)) continue;
      w.set_coeff(j, n, w.coeff(j, n) + (lat.diag(j, n) - sol.E) * xv);
      for (int dj = -v1_table.j_max(); dj <= v1_table.j_max(); ++dj)
        for (int dn = -v1_table.n_max(); dn <= v1_table.n_max(); ++dn) {
          cd c = v1_table.coeff(dj, dn);
          if (c != cd(0, 0))
            w.set_coeff(j + dj, n + dn, w.coeff(j + dj, n + dn) + c * xv);
        }
    }

  // sup over one period of the L2(x) norm of the defect
  const int nt = 256;
  double sup2 = 0.0;
  for (int it = 0; it < nt; ++it) {
    double t = 2.0 * std::numbers::pi * lat.T * it / nt;
    double acc = 0.0;
    for (int j = -Jx; j <= Jx; ++j) {
      cd g(0, 0);
      for (int n = -Nx; n <= Nx; ++n) {
        cd c = w.coeff(j, n);
        if (c != cd(0, 0)) g += c * std::polar(1.0, n * t / lat.T);
      }
      acc += std::norm(g);
    }
    sup2 = std::max(sup2, acc);
  }
  sol.residual_sup = std::sqrt(sup2);
  return sol;
}

TorusField FloquetSolution::trace(double t) const {
  const double T = xi_restricted.period_scale();
  TorusField out(xi_restricted.j_max());
  cd phase = std::polar(1.0, -E * t);
  for (int j = -out.j_max(); j <= out.j_max(); ++j) {
    cd acc(0, 0);
    for (int n = -xi_restricted.n_max(); n <= xi_restricted.n_max(); ++n) {
      cd c = xi_restricted.coeff(j, n);
      if (c != cd(0, 0)) acc += c * std::polar(1.0, n * t / T);
    }
    out.set_coeff(j, phase * acc);
  }
  return out;
}

Reconstruction reconstruct_flow(const TorusField& u0, const Spectrum& spec,
                                double t) {
  const Lattice& lat = spec.lattice();
  SpaceTimeField emb = embed_initial(u0, lat.T, lat.J_cap, lat.N_cap);
  std::vector<cd> x(lat.site_count(), cd(0, 0));
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j)
    x[lat.index(j, 0)] = emb.coeff(j, 0);

  double norm2 = 0.0;
  for (const auto& v : x) norm2 += std::norm(v);

  std::vector<cd> c = spec.project(x);
  double captured = 0.0;
  for (const auto& v : c) captured += std::norm(v);

  Reconstruction rec;
  rec.captured_mass_fraction = norm2 > 0 ? captured / norm2 : 1.0;
  rec.complete = rec.captured_mass_fraction >= 1.0 - 1e-9;

  for (int k = 0; k < spec.count(); ++k)
    c[k] *= std::polar(1.0, -spec.eigenvalue(k) * t);
  std::vector<cd> w = spec.synthesize(c);

  TorusField out(lat.J_cap);
  for (int j = -lat.J_cap; j <= lat.J_cap; ++j) {
    cd acc(0, 0);
    for (int n = -lat.N_cap; n <= lat.N_cap; ++n)
      acc += w[lat.index(j, n)] * std::polar(1.0, n * t / lat.T);
    out.set_coeff(j, acc);
  }
  rec.state = out;
  return rec;
}

}  // namespace floq
