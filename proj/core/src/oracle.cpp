#include "dephasing/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "dephasing/errors.hpp"

namespace dephasing {

ComplexMatrix analytic_steady_state(int n_sites) {
  if (n_sites < 1 || n_sites % 2 == 0) throw InvalidArgument("analytic_steady_state: N must be odd");
  const double w = 1.0 / (n_sites + 1);
  ComplexMatrix rho = ComplexMatrix::Zero(n_sites, n_sites);
  for (int i = 0; i < n_sites; ++i) {
    rho(i, i) += w;
    rho(i, n_sites - 1 - i) += w;
  }
  return rho;
}

ThreeSiteClosedForm analytic_n3_elements(double t, double gamma) {
  if (t < 0.0 || gamma < 0.0) throw InvalidArgument("analytic_n3_elements: t and gamma must be >= 0");
  ThreeSiteClosedForm out{};
  const Complex s = std::sqrt(Complex(gamma * gamma - 128.0));
  const Complex arg = 0.25 * t * s;
  out.f = std::cosh(arg) + gamma * std::sinh(arg) / s;
  out.g = 4.0 * kI * std::sinh(arg) / s;
  out.envelope = std::exp(-0.25 * t * gamma);
  out.rho11 = 0.25 * (1.0 - out.envelope * out.f);
  out.rho22 = 0.5 * (1.0 + out.envelope * out.f);
  out.rho12 = out.envelope * out.g;
  return out;
}

ComplexMatrix ThreeSiteClosedForm::matrix() const {
  ComplexMatrix m(3, 3);
  m(0, 0) = m(0, 2) = m(2, 0) = m(2, 2) = rho11;
  m(1, 1) = rho22;
  m(0, 1) = m(2, 1) = rho12;
  m(1, 0) = m(1, 2) = std::conj(rho12);
  return m;
}

double n5_steady_residual(const ComplexMatrix& rho, double gamma) {
  if (rho.rows() != 5 || rho.cols() != 5) throw InvalidArgument("n5_steady_residual: need a 5x5 matrix");
  const Complex r11 = rho(0, 0), r12 = rho(0, 1), r13 = rho(0, 2);
  const Complex r22 = rho(1, 1), r23 = rho(1, 2), r33 = rho(2, 2);
  const double residuals[] = {
      std::abs(kI * (2.0 * r22 - r33 - r13) + 0.5 * gamma * r23),
      std::abs(kI * (2.0 * r12 - r23) + 0.5 * gamma * r13),
      std::abs(r11 + r13 - r22),
      std::abs(2.0 * (r11 + r22) + r33 - 1.0),
  };
  return *std::max_element(std::begin(residuals), std::end(residuals));
}

std::array<double, 4> ppt_eigenvalue_formula(int n_sites) {
  if (n_sites < 3 || n_sites % 2 == 0) throw InvalidArgument("ppt_eigenvalue_formula: N must be odd and >= 3");
  const double n = n_sites;
  const double root = std::sqrt(5.0 - 2.0 * n + n * n);
  const double denom = 2.0 * (1.0 + n);
  return {(-1.0 + n - root) / denom, 1.0 / (n + 1.0), 1.0 / (n + 1.0), (-1.0 + n + root) / denom};
}

}  // namespace dephasing
