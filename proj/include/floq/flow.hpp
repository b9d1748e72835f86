#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "floq/potential.hpp"
#include "floq/torus_field.hpp"

namespace floq {

/// Real-space view of a potential for the integrator: fills v[m] = V(x_m, t)
/// on the uniform grid x_m = -pi + 2*pi*m/n.
class PotentialSampler {
 public:
  virtual ~PotentialSampler() = default;
  virtual void sample_grid(double t, std::span<double> v) const = 0;
  /// x-Fourier coefficient of V(., t) at frequency k.
  virtual cd x_coeff(int k, double t) const = 0;
  virtual int x_band() const = 0;
};

class AnalyticSampler final : public PotentialSampler {
 public:
  explicit AnalyticSampler(const AnalyticPotential& V) : V_(&V) {}
  void sample_grid(double t, std::span<double> v) const override;
  cd x_coeff(int k, double t) const override;
  int x_band() const override { return V_->max_k(); }

 private:
  const AnalyticPotential* V_;
};

/// Samples a space-time coefficient table (periodized or truncated potential).
class TableSampler final : public PotentialSampler {
 public:
  explicit TableSampler(const SpaceTimeField& table) : table_(&table) {}
  void sample_grid(double t, std::span<double> v) const override;
  cd x_coeff(int k, double t) const override;
  int x_band() const override { return table_->j_max(); }

 private:
  const SpaceTimeField* table_;
};

struct FlowConfig {
  double dt = 1e-3;
  int band = 128;                 // resolved spatial band of the state
  int scheme = 2;                 // splitting order (2 = Strang)
  int substeps_per_report = 100;  // steps between trajectory snapshots
};

struct Trajectory {
  std::vector<double> times;
  std::vector<TorusField> states;
  double l2_initial = 0.0;
};

/// Stateful Strang-splitting integrator of i u_t = -Delta u + V u on a
/// collocation grid; kinetic phases are applied spectrally and V as a
/// pointwise phase with its time dependence frozen at the step midpoint.
/// Exactly unitary per step on the grid. V == nullptr means free flow.
class Stepper {
 public:
  Stepper(const TorusField& u0, const PotentialSampler* V, double t0,
          const FlowConfig& config);
  void step();
  void advance(int nsteps);
  double time() const { return t_; }
  double dt() const { return dt_; }
  double l2() const;
  TorusField state() const;  // full-spectrum snapshot, j_max = N/2 - 1
  int grid_size() const { return n_; }

 private:
  const PotentialSampler* V_;
  int n_ = 0;
  double dt_ = 0.0, t_ = 0.0;
  std::vector<cd> spec_;      // FFT-layout spectral state
  std::vector<cd> kin_half_;  // e^{-i j^2 dt / 2} per bin
  std::vector<double> vgrid_;
};

/// Integrates u0 from t0 to t1 (either direction), snapshotting every
/// substeps_per_report steps. Aborts if the L2 norm drifts beyond 1e-6
/// relative (instability guard).
Trajectory evolve(const TorusField& u0, const PotentialSampler* V, double t0,
                  double t1, const FlowConfig& config);

/// Defect of an approximate solution: eta = (i d/dt + Delta - V) u~ by central
/// differencing in t on a uniformly spaced trajectory. Returns
/// {sup_t ||eta||_L2, sup * max|t|} (a guaranteed L2 distance by Duhamel).
struct DefectBound {
  double eta_sup = 0.0;
  double l2_bound = 0.0;
};
DefectBound defect_bound(const Trajectory& traj, const PotentialSampler* V);

/// Probed lower bound on ||S(t)||_{H^s -> H^s}: max growth ratio over
/// `probes` random H^s-normalized inputs.
double measure_flow_norm(const PotentialSampler* V, double s, double t,
                         const FlowConfig& config, std::uint64_t seed,
                         int probes = 20);

/// ||[V(.,t), Pi_J]||_{H^s -> H^s}, assembled from the commutator kernel
/// Vhat(j-j') (Pi(j') - Pi(j)) on the band and evaluated as the l2 norm of
/// the bracket-weight conjugated matrix.
double commutator_norm(const PotentialSampler* V, double t, int J, double s,
                       int band);

struct TailPersistence {
  double ratio = 0.0;  // ||(I-Pi_J) S(t) u0||_{H^s} / ||u0||_{H^s}
  bool regime_ok = true;  // J > |t|^s
};
TailPersistence tail_persistence(const TorusField& u0, const PotentialSampler* V,
                                 int J, double s, double t,
                                 const FlowConfig& config);

/// ||S(t) Pi_J u0 - Pi_J S(t) u0||_{H^s} / ||u0||_{H^s}.
double flow_commutator(const TorusField& u0, const PotentialSampler* V, int J,
                       double s, double t, const FlowConfig& config);

/// Random H^s-normalized probe field supported on |j| <= band.
TorusField random_probe(int band, double s, std::uint64_t seed);

}  // namespace floq
