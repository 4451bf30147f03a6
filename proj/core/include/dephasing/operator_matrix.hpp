#pragma once

#include <variant>
#include <vector>

#include "dephasing/types.hpp"

namespace dephasing {

/// Square complex operator on a many-body sector.
///
/// Storage is dense up to kDenseLimit rows and sparse above. Every accessor works with either
/// representation; callers that care about cost can ask `is_sparse()`.
class OperatorMatrix {
 public:
  static constexpr Eigen::Index kDenseLimit = 64;
  using Triplet = Eigen::Triplet<Complex>;

  OperatorMatrix() = default;

  static OperatorMatrix from_triplets(Eigen::Index dim, const std::vector<Triplet>& triplets);
  static OperatorMatrix from_dense(const ComplexMatrix& m);
  static OperatorMatrix from_sparse(const SparseComplexMatrix& m);
  static OperatorMatrix identity(Eigen::Index dim);

  Eigen::Index dimension() const noexcept;
  bool is_sparse() const noexcept { return std::holds_alternative<SparseComplexMatrix>(storage_); }

  ComplexMatrix dense() const;
  SparseComplexMatrix sparse() const;
  Complex coeff(Eigen::Index row, Eigen::Index col) const;

  ComplexVector apply(const ComplexVector& v) const;
  /// Returns O * m.
  ComplexMatrix left_multiply(const ComplexMatrix& m) const;
  /// Returns m * O.
  ComplexMatrix right_multiply(const ComplexMatrix& m) const;

  /// Tr(rho O).
  Complex expectation(const ComplexMatrix& rho) const;
  /// <psi|O|psi>.
  Complex expectation(const ComplexVector& psi) const;

  bool is_hermitian(double tolerance = 1e-12) const;
  double max_abs() const;

  OperatorMatrix adjoint() const;

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(Complex s, const OperatorMatrix& a);

 private:
  std::variant<ComplexMatrix, SparseComplexMatrix> storage_;
};

/// [A, B] = AB - BA.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

}  // namespace dephasing
