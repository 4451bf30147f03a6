#include <sstream>

#include "dephasing/errors.hpp"
#include "dephasing/lindblad.hpp"

namespace dephasing {

DensityMatrix::DensityMatrix(ComplexMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw InvalidArgument("density matrix must be square and non-empty");
  }
  const DensityInvariants inv = invariants();
  if (!inv.ok()) {
    std::ostringstream msg;
    msg << "invalid density matrix: hermiticity error " << inv.hermiticity_error << ", trace error "
        << inv.trace_error << ", min eigenvalue " << inv.min_eigenvalue;
    throw InvalidArgument(msg.str());
  }
}

DensityMatrix DensityMatrix::from_pure(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm < 1e-14) throw InvalidArgument("from_pure: zero state");
  const ComplexVector unit = psi / norm;
  return DensityMatrix(unit * unit.adjoint());
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix entries) {
  DensityMatrix rho;
  rho.entries_ = std::move(entries);
  return rho;
}

DensityInvariants DensityMatrix::invariants() const {
  DensityInvariants inv;
  inv.hermiticity_error = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  inv.trace_error = std::abs(entries_.trace() - Complex(1.0));
  const ComplexMatrix hermitian_part = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part, Eigen::EigenvaluesOnly);
  inv.min_eigenvalue = eig.eigenvalues().minCoeff();
  return inv;
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

ComplexVector vectorize(const ComplexMatrix& rho) {
  return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

ComplexMatrix unvectorize(const ComplexVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw DimensionMismatch("unvectorize: length is not a perfect square");
  return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

}  // namespace dephasing
