#pragma once

#include <span>
#include <vector>

#include "dephasing/fock.hpp"
#include "dephasing/lindblad.hpp"
#include "dephasing/model.hpp"
#include "dephasing/types.hpp"

namespace dephasing {

/// Two-point function C_jk = <f_j^dag f_k> on N sites (entry (j-1, k-1) for sites j, k).
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  /// Validates Hermiticity and 0 <= eigenvalues <= 1; throws InvalidArgument otherwise.
  explicit CorrelationMatrix(ComplexMatrix entries, double tolerance = 1e-9);
  static CorrelationMatrix unchecked(ComplexMatrix entries);

  const ComplexMatrix& matrix() const noexcept { return entries_; }
  Eigen::Index n_sites() const noexcept { return entries_.rows(); }
  /// 1-based access.
  Complex at(int j, int k) const { return entries_(j - 1, k - 1); }
  double particle_number() const { return entries_.trace().real(); }
  RealVector eigenvalues() const;

 private:
  ComplexMatrix entries_;
};

/// C_jk = Tr(rho f_j^dag f_k) from a many-body density matrix.
CorrelationMatrix correlation_from_state(const ComplexMatrix& rho, const ManyBodyBasis& basis);

/// Single-particle correlation matrix of a projector onto given single-particle vectors.
CorrelationMatrix correlation_from_modes(const RealMatrix& modes, std::span<const int> mode_indices);

struct CorrelationEvolveOptions {
  double relative_tolerance = 1e-10;
  double absolute_tolerance = 1e-13;
  double initial_step = 1e-3;
};

/// Closed bilinear dynamics of the quadratic problem:
///   dC/dt = i (h^T C - C h^T) - (gamma / 2) (delta_jc - delta_kc)^2 C_jk.
/// `center` is the 1-based dephased site. h must be real symmetric (interaction-free).
std::vector<CorrelationMatrix> correlation_evolve(const CorrelationMatrix& c0, const RealMatrix& h,
                                                  double gamma, int center,
                                                  std::span<const double> sample_times,
                                                  const CorrelationEvolveOptions& options = {});

/// Same, with h, gamma and the centre taken from a lattice spec. Refuses V_int != 0.
std::vector<CorrelationMatrix> correlation_evolve(const CorrelationMatrix& c0, const LatticeSpec& spec,
                                                  std::span<const double> sample_times,
                                                  bool include_trap = false,
                                                  const CorrelationEvolveOptions& options = {});

/// dC/dt evaluated once (exposed for the stationarity check).
ComplexMatrix correlation_derivative(const ComplexMatrix& c, const RealMatrix& h, double gamma, int center);

/// N-particle steady correlations from the single-particle ones: entrywise times n_particles.
/// Throws OutsideValidity when n_particles > (N+1)/2 or the result has an eigenvalue above 1.
CorrelationMatrix multiparticle_scaling(const CorrelationMatrix& single_particle_steady, int n_particles);

/// Steady correlations predicted for a Slater state of the given modes of the bare chain.
/// Only the even-parity class (nu_odd = 0) is covered; any odd mode raises OutsideValidity.
CorrelationMatrix predict_steady_correlation(const LatticeSpec& spec, std::span<const int> mode_indices);

}  // namespace dephasing
