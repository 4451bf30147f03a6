#pragma once

#include <array>

#include "dephasing/types.hpp"

namespace dephasing {

/// Single-particle steady state for even-parity inputs:
/// rho = 1/(N+1) sum_i (|i><i| + |i><N+1-i|), i.e. 1/(N+1) on the diagonal and anti-diagonal
/// with 2/(N+1) at the centre. Throws InvalidArgument for even N.
ComplexMatrix analytic_steady_state(int n_sites);

/// Closed-form N = 3 single-particle trajectory from |010>.
///
/// f and g are evaluated with a complex sqrt(gamma^2 - 128) so both the oscillatory
/// (gamma < sqrt(128)) and overdamped branches use the same hyperbolic expressions.
struct ThreeSiteClosedForm {
  Complex f;         // cosh(t s / 4) + gamma sinh(t s / 4) / s
  Complex g;         // 4 i sinh(t s / 4) / s
  double envelope;   // exp(-t gamma / 4)
  Complex rho11;     // = rho13 = rho31 = rho33
  Complex rho22;
  Complex rho12;     // = rho32;  rho21 = rho23 = conj(rho12)

  ComplexMatrix matrix() const;
};

ThreeSiteClosedForm analytic_n3_elements(double t, double gamma);

/// Max |residual| of the four N = 5 stationarity equations (J = 1):
///   i(2 rho22 - rho33 - rho13) + gamma rho23 / 2 = 0
///   i(2 rho12 - rho23) + gamma rho13 / 2 = 0
///   rho11 + rho13 - rho22 = 0
///   2 (rho11 + rho22) + rho33 = 1
/// Entries are read from the upper half of a reflection-symmetric 5x5 matrix.
double n5_steady_residual(const ComplexMatrix& rho, double gamma = 1.0);

/// Partial-transpose spectrum of the symmetric-pair steady RDM, ascending:
/// {(N-1-sqrt(N^2-2N+5)) / (2(N+1)), 1/(N+1), 1/(N+1), (N-1+sqrt(N^2-2N+5)) / (2(N+1))}.
std::array<double, 4> ppt_eigenvalue_formula(int n_sites);

}  // namespace dephasing
