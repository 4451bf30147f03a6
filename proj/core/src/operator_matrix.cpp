#include "dephasing/operator_matrix.hpp"

#include "dephasing/errors.hpp"

namespace dephasing {

namespace {

void require_same_dim(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("operator dimensions differ: " + std::to_string(a.dimension()) +
                            " vs " + std::to_string(b.dimension()));
  }
}

}  // namespace

OperatorMatrix OperatorMatrix::from_triplets(Eigen::Index dim, const std::vector<Triplet>& triplets) {
  SparseComplexMatrix s(dim, dim);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return from_sparse(s);
}

OperatorMatrix OperatorMatrix::from_dense(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("operator must be square");
  OperatorMatrix op;
  if (m.rows() > kDenseLimit) {
    op.storage_ = SparseComplexMatrix(m.sparseView(0.0));
  } else {
    op.storage_ = m;
  }
  return op;
}

OperatorMatrix OperatorMatrix::from_sparse(const SparseComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("operator must be square");
  OperatorMatrix op;
  if (m.rows() > kDenseLimit) {
    SparseComplexMatrix s = m;
    s.prune(Complex(0.0));
    s.makeCompressed();
    op.storage_ = std::move(s);
  } else {
    op.storage_ = ComplexMatrix(m);
  }
  return op;
}

OperatorMatrix OperatorMatrix::identity(Eigen::Index dim) {
  SparseComplexMatrix s(dim, dim);
  s.setIdentity();
  return from_sparse(s);
}

Eigen::Index OperatorMatrix::dimension() const noexcept {
  return std::visit([](const auto& m) { return m.rows(); }, storage_);
}

ComplexMatrix OperatorMatrix::dense() const {
  return std::visit([](const auto& m) { return ComplexMatrix(m); }, storage_);
}

SparseComplexMatrix OperatorMatrix::sparse() const {
  if (const auto* s = std::get_if<SparseComplexMatrix>(&storage_)) return *s;
  return std::get<ComplexMatrix>(storage_).sparseView(0.0);
}

Complex OperatorMatrix::coeff(Eigen::Index row, Eigen::Index col) const {
  return std::visit([&](const auto& m) { return Complex(m.coeff(row, col)); }, storage_);
}

ComplexVector OperatorMatrix::apply(const ComplexVector& v) const {
  if (v.size() != dimension()) throw DimensionMismatch("apply: vector size mismatch");
  return std::visit([&](const auto& m) { return ComplexVector(m * v); }, storage_);
}

ComplexMatrix OperatorMatrix::left_multiply(const ComplexMatrix& x) const {
  if (x.rows() != dimension()) throw DimensionMismatch("left_multiply: size mismatch");
  return std::visit([&](const auto& m) { return ComplexMatrix(m * x); }, storage_);
}

ComplexMatrix OperatorMatrix::right_multiply(const ComplexMatrix& x) const {
  if (x.cols() != dimension()) throw DimensionMismatch("right_multiply: size mismatch");
  return std::visit([&](const auto& m) { return ComplexMatrix(x * m); }, storage_);
}

Complex OperatorMatrix::expectation(const ComplexMatrix& rho) const {
  return left_multiply(rho).trace();
}

Complex OperatorMatrix::expectation(const ComplexVector& psi) const {
  return psi.dot(apply(psi));
}

bool OperatorMatrix::is_hermitian(double tolerance) const {
  return (*this - adjoint()).max_abs() <= tolerance;
}

double OperatorMatrix::max_abs() const {
  if (const auto* s = std::get_if<SparseComplexMatrix>(&storage_)) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < s->nonZeros(); ++k) best = std::max(best, std::abs(s->valuePtr()[k]));
    return best;
  }
  const auto& d = std::get<ComplexMatrix>(storage_);
  return d.size() == 0 ? 0.0 : d.cwiseAbs().maxCoeff();
}

OperatorMatrix OperatorMatrix::adjoint() const {
  OperatorMatrix out;
  std::visit([&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    out.storage_ = M(m.adjoint());
  }, storage_);
  return out;
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b);
  if (a.is_sparse() || b.is_sparse()) return OperatorMatrix::from_sparse(a.sparse() + b.sparse());
  return OperatorMatrix::from_dense(a.dense() + b.dense());
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b);
  if (a.is_sparse() || b.is_sparse()) return OperatorMatrix::from_sparse(a.sparse() - b.sparse());
  return OperatorMatrix::from_dense(a.dense() - b.dense());
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b);
  if (a.is_sparse() || b.is_sparse()) {
    return OperatorMatrix::from_sparse(SparseComplexMatrix(a.sparse() * b.sparse()));
  }
  return OperatorMatrix::from_dense(a.dense() * b.dense());
}

OperatorMatrix operator*(Complex s, const OperatorMatrix& a) {
  if (a.is_sparse()) return OperatorMatrix::from_sparse(s * a.sparse());
  return OperatorMatrix::from_dense(s * a.dense());
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  return a * b - b * a;
}

}  // namespace dephasing
