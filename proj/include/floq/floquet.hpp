#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "floq/params.hpp"
#include "floq/potential.hpp"
#include "floq/torus_field.hpp"

namespace floq {

/// Finite quasi-energy lattice {(j,n) : |j| <= J_cap, |n| <= N_cap}.
struct Lattice {
  double T = 0.0;
  int J_cap = 0;
  int N_cap = 0;
  double A = 2.0;
  double sigma = 3.0;

  /// N_cap from the A*T*(log T)^sigma rule.
  static Lattice make(double T, int J_cap, double A, double sigma);

  long site_count() const {
    return static_cast<long>(2 * J_cap + 1) * (2 * N_cap + 1);
  }
  long index(int j, int n) const {
    return static_cast<long>(j + J_cap) * (2 * N_cap + 1) + (n + N_cap);
  }
  bool contains(int j, int n) const {
    return std::abs(j) <= J_cap && std::abs(n) <= N_cap;
  }
  double diag(int j, int n) const {
    return n / T + static_cast<double>(j) * j;
  }
  /// Low-frequency block radius 4A(log T)^sigma.
  double J0() const { return 4.0 * A * std::pow(log_scale(T), sigma); }
  void validate() const;
};

/// The Hermitian lattice operator diag(n/T + j^2) + V2-hat * (convolution),
/// restricted to the lattice (couplings out of it are absent). Held in
/// operator form: diagonal rule plus the convolution kernel.
class FloquetOperator {
 public:
  FloquetOperator(SpaceTimeField kernel, Lattice lattice);

  const Lattice& lattice() const { return lattice_; }
  const SpaceTimeField& kernel() const { return kernel_; }
  cd entry(int j, int n, int jp, int np) const;
  void apply(const std::vector<cd>& x, std::vector<cd>& y) const;
  bool kernel_real() const { return kernel_real_; }
  bool kernel_even_j() const { return kernel_even_j_; }
  /// sum |V2-hat| over the kernel: a Gershgorin-style off-diagonal budget.
  double kernel_abs_sum() const { return kernel_abs_sum_; }
  double trace() const;
  /// Documented sparse-triplet text format: "# floq-triplets v1" header,
  /// then lines "j n j' n' re im" for every nonzero upper-triangle entry.
  void export_triplets(std::ostream& os) const;

 private:
  SpaceTimeField kernel_;
  Lattice lattice_;
  bool kernel_real_ = false, kernel_even_j_ = false;
  double kernel_abs_sum_ = 0.0;
};

/// Validates the kernel (Hermitian symmetry <=> V2 real) and binds it to the
/// lattice.
FloquetOperator assemble(const TruncatedPotential& V2, const Lattice& lattice);

struct EigOptions {
  long dense_budget = 20000;  // sites; above this the iterative path is taken
  int iterative_pairs = 64;   // pairs requested from shift-invert Lanczos
  double shift = 0.0;         // shift-invert target
  double tol = 1e-10;
};

/// Full (or flagged-partial) spectrum with orthonormal eigenvectors.
/// Storage is basis-adapted: a kernel that is real and even in j is solved in
/// j-parity blocks, which halves the dense eigensolve cost and memory.
class Spectrum {
 public:
  int count() const;
  /// true when the eigenbasis spans all of l2(Lattice)
  bool complete() const { return complete_; }
  double eigenvalue(int k) const;
  /// Eigenvector k as a dense complex vector over lattice sites.
  std::vector<cd> vector(int k) const;
  /// Squared-mass profile of eigenvector k over (|j|, n):
  /// out[ absj*(2*N_cap+1) + n+N_cap ] = |xi(j,n)|^2 + |xi(-j,n)|^2 (j>0),
  /// = |xi(0,n)|^2 at absj = 0.
  void shell_mass(int k, std::vector<double>& out) const;
  /// Expansion coefficients <xi_k, x> for all k.
  std::vector<cd> project(const std::vector<cd>& site_vec) const;
  /// sum_k coeffs[k] * xi_k.
  std::vector<cd> synthesize(const std::vector<cd>& coeffs) const;
  const Lattice& lattice() const { return lattice_; }

 private:
  friend Spectrum eigensolve(const FloquetOperator&, const EigOptions&);
  friend struct SpectrumBuilder;
  struct Block {
    int parity = 0;  // +1 even in j, -1 odd
    int j_lo = 0;    // 0 for even, 1 for odd
    int dim = 0;
    std::vector<double> evals;
    std::vector<double> vecs;  // column-major dim x dim
  };
  enum class Storage { Blocks, FullReal, FullComplex, PartialVecs };

  Storage storage_ = Storage::FullComplex;
  Lattice lattice_;
  bool complete_ = false;
  std::vector<Block> blocks_;
  std::vector<std::pair<int, int>> order_;  // (block, column) sorted by E
  // FullReal / FullComplex
  std::vector<double> evals_;
  std::vector<double> vecs_real_;
  std::vector<cd> vecs_complex_;
  // PartialVecs
  std::vector<std::vector<cd>> partial_;

  long block_row(const Block& b, int j, int n) const;
};

Spectrum eigensolve(const FloquetOperator& H, const EigOptions& opts = {});

/// Sites with |n/T + j^2 - E| <= threshold.
std::vector<std::pair<int, int>> resonant_set(double E, const Lattice& lattice,
                                              double threshold);

enum class Verdict { LowFrequency, Traveling, Fail };
std::string to_string(Verdict v);

struct LocalizationEntry {
  double E = 0.0;
  double mass_outside_omega0 = 0.0;
  int best_j0 = 0, best_n0 = 0;
  double mass_outside_best_omega_prime = 0.0;
  Verdict verdict = Verdict::Fail;
};

struct LocalizationReport {
  std::vector<LocalizationEntry> entries;
  double epsilon = 0.0;          // mass threshold used
  double omega0_radius = 0.0;    // 4A(log T)^sigma
  int shell_halfwidth = 0;       // floor((log T)^sigma)
  int n_halfwidth = 0;           // floor(T (log T)^sigma)
  int n_fail = 0;
};

/// Per-eigenvector mass outside Omega_0 and outside the best traveling strip
/// Omega'(j0,n0). Candidate centers are the top-mass site and its one-radius
/// neighborhood; exhaustive=true scans every lattice center (test mode).
LocalizationReport localization_report(const Spectrum& spec,
                                       const Lattice& lattice, double sigma,
                                       double epsilon,
                                       bool exhaustive = false);

/// Truncated Floquet wave built from xi' = xi restricted to its strip, with
/// the measured defect sup_t ||(i d_t + Delta - V1) xi_check||_{L2}.
struct FloquetSolution {
  double E = 0.0;
  SpaceTimeField xi_restricted;  // on the lattice extents
  double residual_sup = 0.0;
  /// x-trace at time t: u(j) = e^{-iEt} sum_n xi'(j,n) e^{i n t/T}
  TorusField trace(double t) const;
};

FloquetSolution floquet_solution(const Spectrum& spec, int k,
                                 const LocalizationEntry& loc,
                                 const LocalizationReport& report,
                                 const SpaceTimeField& v1_table);

struct Reconstruction {
  TorusField state;
  double captured_mass_fraction = 0.0;  // of ||u0||^2 captured by the expansion
  bool complete = true;                 // captured >= 1 - 1e-9
};

/// Embeds u0 on the n = 0 row, expands over the eigenbasis, advances each
/// pair by its quasi-energy phase and returns the x-trace at time t.
Reconstruction reconstruct_flow(const TorusField& u0, const Spectrum& spec,
                                double t);

}  // namespace floq
