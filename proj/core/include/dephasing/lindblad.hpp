#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dephasing/fock.hpp"
#include "dephasing/operator_matrix.hpp"
#include "dephasing/types.hpp"

namespace dephasing {

/// Result of checking the three density-matrix invariants.
struct DensityInvariants {
  double hermiticity_error = 0.0;  // max |rho - rho^dag|
  double trace_error = 0.0;        // |Tr rho - 1|
  double min_eigenvalue = 0.0;

  bool ok(double hermiticity_tol = 1e-10, double trace_tol = 1e-9, double psd_tol = 1e-8) const {
    return hermiticity_error < hermiticity_tol && trace_error < trace_tol &&
           min_eigenvalue > -psd_tol;
  }
};

/// Hermitian, unit-trace, positive semidefinite matrix on a sector basis.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates on construction with the default tolerances; throws InvalidArgument otherwise.
  explicit DensityMatrix(ComplexMatrix entries);

  static DensityMatrix from_pure(const ComplexVector& psi);
  /// Wraps without validation (used for intermediate integrator output).
  static DensityMatrix unchecked(ComplexMatrix entries);

  const ComplexMatrix& matrix() const noexcept { return entries_; }
  Eigen::Index dimension() const noexcept { return entries_.rows(); }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  DensityInvariants invariants() const;
  double purity() const;

 private:
  ComplexMatrix entries_;
};

/// Column-stacking vectorization: vec(rho)[r + c * d] = rho(r, c).
ComplexVector vectorize(const ComplexMatrix& rho);
ComplexMatrix unvectorize(const ComplexVector& v);

/// Superoperator of d rho / dt = -i[H, rho] + gamma (L rho L - 1/2 {L^2, rho}).
///
/// Under column stacking: -i (I (x) H - H^T (x) I) + gamma (L^T (x) L - 1/2 I (x) L^2 -
/// 1/2 (L^2)^T (x) I).
class Liouvillian {
 public:
  Liouvillian(OperatorMatrix hamiltonian, double gamma, OperatorMatrix jump);

  Eigen::Index hilbert_dimension() const noexcept { return hamiltonian_.dimension(); }
  Eigen::Index dimension() const noexcept { return superoperator_.rows(); }
  double gamma() const noexcept { return gamma_; }
  const OperatorMatrix& hamiltonian() const noexcept { return hamiltonian_; }
  const OperatorMatrix& jump() const noexcept { return jump_; }
  const SparseComplexMatrix& superoperator() const noexcept { return superoperator_; }

  ComplexVector apply(const ComplexVector& vec_rho) const { return superoperator_ * vec_rho; }
  /// d rho / dt for a matrix argument.
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  /// max |(L rho)_{jk}|.
  double residual(const ComplexMatrix& rho) const;

 private:
  OperatorMatrix hamiltonian_;
  double gamma_;
  OperatorMatrix jump_;
  SparseComplexMatrix superoperator_;
};

/// Throws on dimension mismatch, gamma < 0, or non-Hermitian H / L.
Liouvillian build_liouvillian(const OperatorMatrix& hamiltonian, double gamma,
                              const OperatorMatrix& central_site_number_operator);

enum class EvolutionMethod { kAdaptive, kExactExponential };

struct EvolveOptions {
  EvolutionMethod method = EvolutionMethod::kAdaptive;
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  double initial_step = 1e-3;
  /// Invariant drift beyond 10x these thresholds aborts the run.
  double trace_tolerance = 1e-9;
  double hermiticity_tolerance = 1e-10;
  double positivity_tolerance = 1e-8;
  bool check_positivity = true;
  /// Exact exponentials build a dense superoperator; refuse above this many rows.
  Eigen::Index max_dense_dimension = 4096;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::size_t size() const noexcept { return times.size(); }
};

/// Samples rho(t) = exp(L t) rho0 at strictly increasing, non-negative times.
Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& liouvillian,
                  std::span<const double> sample_times, const EvolveOptions& options = {});

/// Uniform grid 0, dt, ..., t_final (t_final included).
std::vector<double> uniform_times(double t_final, std::size_t samples);

struct SteadyStateOptions {
  double convergence_tolerance = 1e-9;
  /// Defaults to 1e4 / gamma when unset.
  std::optional<double> t_max;
  /// Residual is checked after every chunk of this much simulated time.
  double check_interval = 1.0;
  EvolveOptions evolve;
};

struct SteadyStateResult {
  DensityMatrix state;
  double elapsed_time = 0.0;
  double residual = 0.0;
};

/// Integrates until ||L vec(rho)||_inf < tolerance. Throws NonConvergence (with the residual)
/// when t_max is reached first.
SteadyStateResult steady_state_by_integration(const DensityMatrix& rho0, const Liouvillian& liouvillian,
                                              const SteadyStateOptions& options = {});

enum class KernelMethod {
  kAuto,
  /// Hermitian eigensolve of L^dag L on the full superoperator.
  kDense,
  /// Commutant of {H, L}: block-diagonalize H, then solve [L, X] = 0 inside the blocks.
  /// Exact for this unital Lindbladian with Hermitian jumps.
  kCommutant,
};

struct KernelBasis {
  /// Hilbert-Schmidt orthonormal d x d matrices spanning ker L.
  std::vector<ComplexMatrix> elements;
  double max_residual = 0.0;
  std::size_t size() const noexcept { return elements.size(); }
};

KernelBasis steady_state_null_space(const Liouvillian& liouvillian,
                                    KernelMethod method = KernelMethod::kAuto,
                                    double tolerance = 1e-10);

/// Hilbert-Schmidt orthogonal projection of rho onto the kernel. Left and right kernels coincide
/// for Hermitian jumps, so this is the long-time limit whenever no purely imaginary
/// eigenvalues are excited.
ComplexMatrix project_onto_kernel(const KernelBasis& kernel, const ComplexMatrix& rho);

/// Re Tr(rho(t) O) along a trajectory.
std::vector<double> conserved_charge_trace(const Trajectory& trajectory, const OperatorMatrix& op);
std::vector<double> conserved_charge_trace(const Trajectory& trajectory, const ComplexMatrix& op);

/// Max residual of the single-particle stationarity recursion (J = 1):
/// i[rho_{j,k+1} + rho_{j,k-1} - rho_{j+1,k} - rho_{j-1,k}] + (gamma/2) rho_jk [exactly one of
/// j, k at the centre] = 0, with out-of-range neighbours dropped.
double residual_of_steady_recursion(const ComplexMatrix& rho, double gamma);

}  // namespace dephasing
