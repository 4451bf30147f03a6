#include <unsupported/Eigen/KroneckerProduct>

#include "dephasing/errors.hpp"
#include "dephasing/lindblad.hpp"

namespace dephasing {

Liouvillian::Liouvillian(OperatorMatrix hamiltonian, double gamma, OperatorMatrix jump)
    : hamiltonian_(std::move(hamiltonian)), gamma_(gamma), jump_(std::move(jump)) {
  const Eigen::Index d = hamiltonian_.dimension();
  SparseComplexMatrix id(d, d);
  id.setIdentity();
  const SparseComplexMatrix h = hamiltonian_.sparse();
  const SparseComplexMatrix l = jump_.sparse();
  const SparseComplexMatrix l2 = l * l;
  const SparseComplexMatrix ht = h.transpose();
  const SparseComplexMatrix lt = l.transpose();
  const SparseComplexMatrix l2t = l2.transpose();

  SparseComplexMatrix coherent = SparseComplexMatrix(Eigen::kroneckerProduct(id, h)) -
                                 SparseComplexMatrix(Eigen::kroneckerProduct(ht, id));
  superoperator_ = Complex(0.0, -1.0) * coherent;
  if (gamma_ != 0.0) {
    SparseComplexMatrix dissipator = SparseComplexMatrix(Eigen::kroneckerProduct(lt, l)) -
                                     0.5 * SparseComplexMatrix(Eigen::kroneckerProduct(id, l2)) -
                                     0.5 * SparseComplexMatrix(Eigen::kroneckerProduct(l2t, id));
    superoperator_ += gamma_ * dissipator;
  }
  superoperator_.prune(Complex(0.0));
  superoperator_.makeCompressed();
}

ComplexMatrix Liouvillian::apply(const ComplexMatrix& rho) const {
  if (rho.rows() != hilbert_dimension() || rho.cols() != hilbert_dimension()) {
    throw DimensionMismatch("Liouvillian::apply: density matrix has wrong size");
  }
  return unvectorize(apply(vectorize(rho)));
}

double Liouvillian::residual(const ComplexMatrix& rho) const {
  return apply(vectorize(rho)).cwiseAbs().maxCoeff();
}

Liouvillian build_liouvillian(const OperatorMatrix& hamiltonian, double gamma,
                              const OperatorMatrix& central_site_number_operator) {
  if (hamiltonian.dimension() != central_site_number_operator.dimension()) {
    throw DimensionMismatch("build_liouvillian: H and L have different dimensions");
  }
  if (gamma < 0.0) throw InvalidArgument("build_liouvillian: gamma must be non-negative");
  if (!hamiltonian.is_hermitian(1e-12)) throw InvalidArgument("build_liouvillian: H is not Hermitian");
  if (!central_site_number_operator.is_hermitian(1e-12)) {
    throw InvalidArgument("build_liouvillian: jump operator is not Hermitian");
  }
  return Liouvillian(hamiltonian, gamma, central_site_number_operator);
}

}  // namespace dephasing
