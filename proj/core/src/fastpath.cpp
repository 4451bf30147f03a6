#include "dephasing/fastpath.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/SparseCore>

#include "dephasing/errors.hpp"
#include "dephasing/oracle.hpp"
#include "integrator.hpp"

namespace dephasing {

CorrelationMatrix::CorrelationMatrix(ComplexMatrix entries, double tolerance)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw InvalidArgument("correlation matrix must be square");
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > tolerance) {
    throw InvalidArgument("correlation matrix is not Hermitian");
  }
  const RealVector ev = eigenvalues();
  if (ev.size() > 0 && (ev.minCoeff() < -tolerance || ev.maxCoeff() > 1.0 + tolerance)) {
    std::ostringstream msg;
    msg << "correlation matrix eigenvalues outside [0, 1]: [" << ev.minCoeff() << ", "
        << ev.maxCoeff() << "]";
    throw InvalidArgument(msg.str());
  }
}

CorrelationMatrix CorrelationMatrix::unchecked(ComplexMatrix entries) {
  CorrelationMatrix c;
  c.entries_ = std::move(entries);
  return c;
}

RealVector CorrelationMatrix::eigenvalues() const {
  const ComplexMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

CorrelationMatrix correlation_from_state(const ComplexMatrix& rho, const ManyBodyBasis& basis) {
  if (rho.rows() != basis.dimension()) throw DimensionMismatch("correlation_from_state: size mismatch");
  const int n = basis.n_sites();
  ComplexMatrix c(n, n);
  for (int j = 1; j <= n; ++j) {
    for (int k = 1; k <= n; ++k) c(j - 1, k - 1) = bilinear_operator(basis, j, k).expectation(rho);
  }
  return CorrelationMatrix::unchecked(std::move(c));
}

CorrelationMatrix correlation_from_modes(const RealMatrix& modes, std::span<const int> mode_indices) {
  // <f_j^dag f_k> = sum_m phi_m(j)^* phi_m(k).
  ComplexMatrix c = ComplexMatrix::Zero(modes.rows(), modes.rows());
  for (int m : mode_indices) {
    if (m < 0 || m >= modes.cols()) throw InvalidArgument("correlation_from_modes: bad mode index");
    const RealVector phi = modes.col(m);
    c += (phi * phi.transpose()).cast<Complex>();
  }
  return CorrelationMatrix(std::move(c));
}

namespace {

using SparseComplex = Eigen::SparseMatrix<Complex>;

// h is banded, so keep it sparse: each product is O(N^2) instead of O(N^3).
SparseComplex sparse_transpose(const RealMatrix& h) {
  return SparseComplex(h.transpose().cast<Complex>().sparseView());
}

void derivative_into(const ComplexMatrix& c, const SparseComplex& ht, double gamma, Eigen::Index ci,
                     ComplexMatrix& dc) {
  dc.noalias() = ht * c;
  dc.noalias() -= c * ht;
  dc *= kI;
  for (Eigen::Index k = 0; k < c.rows(); ++k) {
    if (k == ci) continue;
    dc(ci, k) -= 0.5 * gamma * c(ci, k);
    dc(k, ci) -= 0.5 * gamma * c(k, ci);
  }
}

}  // namespace

ComplexMatrix correlation_derivative(const ComplexMatrix& c, const RealMatrix& h, double gamma, int center) {
  ComplexMatrix dc(c.rows(), c.cols());
  derivative_into(c, sparse_transpose(h), gamma, center - 1, dc);
  return dc;
}

std::vector<CorrelationMatrix> correlation_evolve(const CorrelationMatrix& c0, const RealMatrix& h,
                                                  double gamma, int center,
                                                  std::span<const double> sample_times,
                                                  const CorrelationEvolveOptions& options) {
  const Eigen::Index n = c0.n_sites();
  if (h.rows() != n || h.cols() != n) throw DimensionMismatch("correlation_evolve: h size mismatch");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw InvalidArgument("correlation_evolve: h must be real symmetric");
  }
  if (center < 1 || center > n) throw InvalidArgument("correlation_evolve: centre outside lattice");
  if (gamma < 0.0) throw InvalidArgument("correlation_evolve: gamma must be non-negative");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (sample_times[k] < 0.0 || (k > 0 && !(sample_times[k] > sample_times[k - 1]))) {
      throw InvalidArgument("correlation_evolve: sample times must be non-negative and increasing");
    }
  }

  const ComplexVector x0 = Eigen::Map<const ComplexVector>(c0.matrix().data(), n * n);
  const SparseComplex ht = sparse_transpose(h);
  ComplexMatrix c(n, n), dc(n, n);
  detail::AdaptiveIntegrator integrator(
      [&](const ComplexVector& x, ComplexVector& dx) {
        c = Eigen::Map<const ComplexMatrix>(x.data(), n, n);
        derivative_into(c, ht, gamma, center - 1, dc);
        dx = Eigen::Map<const ComplexVector>(dc.data(), n * n);
      },
      x0, 0.0, options.relative_tolerance, options.absolute_tolerance, options.initial_step);

  std::vector<CorrelationMatrix> out;
  out.reserve(sample_times.size());
  for (double t : sample_times) {
    if (t == 0.0) {
      out.push_back(c0);
      continue;
    }
    const ComplexVector x = integrator.advance_to(t);
    out.push_back(CorrelationMatrix::unchecked(Eigen::Map<const ComplexMatrix>(x.data(), n, n)));
  }
  return out;
}

std::vector<CorrelationMatrix> correlation_evolve(const CorrelationMatrix& c0, const LatticeSpec& spec,
                                                  std::span<const double> sample_times,
                                                  bool include_trap,
                                                  const CorrelationEvolveOptions& options) {
  spec.validate();
  if (spec.interaction != 0.0) {
    throw OutsideValidity("correlation fast path needs a quadratic Hamiltonian (interaction = " +
                          std::to_string(spec.interaction) + ")");
  }
  return correlation_evolve(c0, build_single_particle_hamiltonian(spec, include_trap),
                            spec.dephasing_gamma, spec.center_site(), sample_times, options);
}

CorrelationMatrix multiparticle_scaling(const CorrelationMatrix& single_particle_steady, int n_particles) {
  const Eigen::Index n = single_particle_steady.n_sites();
  if (n_particles < 1 || n_particles > (n + 1) / 2) {
    throw OutsideValidity("multiparticle scaling holds for 1 <= n_particles <= (N+1)/2");
  }
  ComplexMatrix scaled = static_cast<double>(n_particles) * single_particle_steady.matrix();
  auto out = CorrelationMatrix::unchecked(std::move(scaled));
  const double top = out.eigenvalues().maxCoeff();
  if (top > 1.0 + 1e-9) {
    throw OutsideValidity("scaled correlation matrix has eigenvalue " + std::to_string(top) + " > 1");
  }
  return out;
}

CorrelationMatrix predict_steady_correlation(const LatticeSpec& spec, std::span<const int> mode_indices) {
  spec.validate();
  if (spec.dephasing_gamma == 0.0) throw OutsideValidity("without dephasing there is no relaxation");
  const RealMatrix h = build_single_particle_hamiltonian(spec, false);
  const ModeParity parity = classify_mode_parity(h, reflection_matrix(spec.n_sites));
  for (int m : mode_indices) {
    if (m < 0 || m >= spec.n_sites) throw InvalidArgument("predict_steady_correlation: bad mode index");
    if (parity.parity[static_cast<std::size_t>(m)] < 0) {
      throw OutsideValidity("mode " + std::to_string(m) +
                            " is odd; the scaling law only covers even-parity Slater states");
    }
  }
  const ComplexMatrix single = analytic_steady_state(spec.n_sites).transpose();
  return multiparticle_scaling(CorrelationMatrix::unchecked(single),
                               static_cast<int>(mode_indices.size()));
}

}  // namespace dephasing
