#pragma once

#include <array>

#include "dephasing/fock.hpp"
#include "dephasing/types.hpp"

namespace dephasing {

using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

/// Reduced state of two sites in the local occupation basis {|00>, |01>, |10>, |11>}, where the
/// first digit is the occupation of `site_i` (site_i < site_j).
struct TwoSiteRDM {
  int site_i = 1;
  int site_j = 2;
  Matrix4c rho = Matrix4c::Zero();

  double p00() const { return rho(0, 0).real(); }
  double p01() const { return rho(1, 1).real(); }
  double p10() const { return rho(2, 2).real(); }
  double p11() const { return rho(3, 3).real(); }
  /// <10|rho|01>, the single hopping coherence of a number-conserving state.
  Complex coherence() const { return rho(2, 1); }
};

/// Fermionic partial trace onto sites (i, j). Modes are reordered so the pair sits last in
/// the creation string (i before j), the reordering signs are accumulated, and the remaining
/// modes are traced out.
TwoSiteRDM reduce_to_pair(const ComplexMatrix& rho, const ManyBodyBasis& basis, int i, int j);

/// Wootters concurrence. Throws InvalidArgument when rho has an eigenvalue below -1e-8.
double concurrence(const TwoSiteRDM& rdm);
double concurrence(const Matrix4c& rho);

/// Shortcut 2 max(0, |z| - sqrt(p00 p11)) valid for X-shaped number-conserving pair states.
double x_state_concurrence(const TwoSiteRDM& rdm);

/// Eigenvalues of the partial transpose on the second site, ascending.
std::array<double, 4> partial_transpose_eigenvalues(const TwoSiteRDM& rdm);

/// Sum of |negative eigenvalues| of the partial transpose.
double negativity(const TwoSiteRDM& rdm);

struct XStateCheck {
  bool is_x_state = false;
  double max_off_pattern = 0.0;
};

/// True iff every entry off the diagonal and anti-diagonal has magnitude below `tolerance`.
XStateCheck is_x_state(const ComplexMatrix& rho, double tolerance);

/// Entanglement threshold shared by concurrence and negativity.
inline constexpr double kEntanglementTolerance = 1e-9;

}  // namespace dephasing
