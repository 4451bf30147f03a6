#include "dephasing/entangle.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>

#include "dephasing/errors.hpp"

namespace dephasing {

namespace {

bool occupied(Occupation s, int site) { return ((s >> (site - 1)) & 1U) != 0; }

/// Parity of reordering the ascending creation string of `s` into (rest..., i, j).
int pair_last_sign(Occupation s, int n_sites, int i, int j) {
  std::vector<int> target;
  for (int site = 1; site <= n_sites; ++site) {
    if (occupied(s, site) && site != i && site != j) target.push_back(site);
  }
  if (occupied(s, i)) target.push_back(i);
  if (occupied(s, j)) target.push_back(j);
  int inversions = 0;
  for (std::size_t a = 0; a < target.size(); ++a) {
    for (std::size_t b = a + 1; b < target.size(); ++b) {
      if (target[a] > target[b]) ++inversions;
    }
  }
  return inversions % 2 == 0 ? 1 : -1;
}

Matrix4c spin_flip(const Matrix4c& rho) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  return yy * rho.conjugate() * yy;
}

}  // namespace

TwoSiteRDM reduce_to_pair(const ComplexMatrix& rho, const ManyBodyBasis& basis, int i, int j) {
  const int n = basis.n_sites();
  if (i < 1 || j > n || i >= j) {
    throw InvalidArgument("reduce_to_pair: need 1 <= i < j <= N, got (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
  }
  if (rho.rows() != basis.dimension() || rho.cols() != basis.dimension()) {
    throw DimensionMismatch("reduce_to_pair: density matrix does not match basis");
  }

  struct Entry {
    Eigen::Index index;
    int local;
    int sign;
  };
  const Occupation pair_mask = (Occupation{1} << (i - 1)) | (Occupation{1} << (j - 1));
  std::map<Occupation, std::vector<Entry>> by_rest;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const Occupation s = basis.state(k);
    const int local = (occupied(s, i) ? 2 : 0) + (occupied(s, j) ? 1 : 0);
    by_rest[s & ~pair_mask].push_back(
        {static_cast<Eigen::Index>(k), local, pair_last_sign(s, n, i, j)});
  }

  TwoSiteRDM out;
  out.site_i = i;
  out.site_j = j;
  for (const auto& [rest, entries] : by_rest) {
    for (const auto& a : entries) {
      for (const auto& b : entries) {
        out.rho(a.local, b.local) += static_cast<double>(a.sign * b.sign) * rho(a.index, b.index);
      }
    }
  }
  return out;
}

double concurrence(const Matrix4c& rho) {
  const Matrix4c herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(herm);
  if (eig.eigenvalues().minCoeff() < -1e-8) {
    std::ostringstream msg;
    msg << "concurrence: input is not positive semidefinite (min eigenvalue "
        << eig.eigenvalues().minCoeff() << ")";
    throw InvalidArgument(msg.str());
  }
  const Eigen::Vector4d roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix4c sqrt_rho = eig.eigenvectors() * roots.cast<Complex>().asDiagonal() *
                            eig.eigenvectors().adjoint();
  const Matrix4c m = sqrt_rho * spin_flip(herm) * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Matrix4c> inner(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  Eigen::Vector4d lambda = inner.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  std::sort(lambda.data(), lambda.data() + 4, std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

double concurrence(const TwoSiteRDM& rdm) { return concurrence(rdm.rho); }

double x_state_concurrence(const TwoSiteRDM& rdm) {
  const double p00 = std::max(0.0, rdm.p00());
  const double p11 = std::max(0.0, rdm.p11());
  return 2.0 * std::max(0.0, std::abs(rdm.coherence()) - std::sqrt(p00 * p11));
}

std::array<double, 4> partial_transpose_eigenvalues(const TwoSiteRDM& rdm) {
  Matrix4c pt;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int ap = 0; ap < 2; ++ap) {
        for (int bp = 0; bp < 2; ++bp) pt(2 * a + bp, 2 * ap + b) = rdm.rho(2 * a + b, 2 * ap + bp);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  return {ev[0], ev[1], ev[2], ev[3]};
}

double negativity(const TwoSiteRDM& rdm) {
  double sum = 0.0;
  for (double v : partial_transpose_eigenvalues(rdm)) {
    if (v < 0.0) sum -= v;
  }
  return sum;
}

XStateCheck is_x_state(const ComplexMatrix& rho, double tolerance) {
  if (rho.rows() != rho.cols()) throw InvalidArgument("is_x_state: matrix must be square");
  const Eigen::Index n = rho.rows();
  XStateCheck out;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (r == c || r + c == n - 1) continue;
      out.max_off_pattern = std::max(out.max_off_pattern, std::abs(rho(r, c)));
    }
  }
  out.is_x_state = out.max_off_pattern < tolerance;
  return out;
}

}  // namespace dephasing
