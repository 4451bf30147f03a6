#include <cmath>
#include <limits>
#include <sstream>

#include "dephasing/errors.hpp"
#include "dephasing/lindblad.hpp"
#include "integrator.hpp"

namespace dephasing {

SteadyStateResult steady_state_by_integration(const DensityMatrix& rho0, const Liouvillian& liouvillian,
                                              const SteadyStateOptions& options) {
  if (rho0.dimension() != liouvillian.hilbert_dimension()) {
    throw DimensionMismatch("steady_state_by_integration: dimension mismatch");
  }
  if (!(options.check_interval > 0.0)) throw InvalidArgument("check_interval must be positive");
  double t_max = 0.0;
  if (options.t_max) {
    t_max = *options.t_max;
  } else if (liouvillian.gamma() > 0.0) {
    t_max = 1e4 / liouvillian.gamma();
  } else {
    throw InvalidArgument("steady_state_by_integration: gamma = 0 needs an explicit t_max");
  }

  ComplexVector x = vectorize(rho0.matrix());
  double residual = liouvillian.apply(x).cwiseAbs().maxCoeff();
  if (residual < options.convergence_tolerance) return {rho0, 0.0, residual};

  const auto& ev = options.evolve;
  detail::AdaptiveIntegrator integrator(
      [&liouvillian](const ComplexVector& v, ComplexVector& dv) { dv = liouvillian.apply(v); }, x,
      0.0, ev.relative_tolerance, ev.absolute_tolerance, ev.initial_step);
  double t = 0.0;
  while (t < t_max) {
    t = std::min(t + options.check_interval, t_max);
    x = integrator.advance_to(t);
    residual = liouvillian.apply(x).cwiseAbs().maxCoeff();
    if (residual < options.convergence_tolerance) {
      ComplexMatrix rho = unvectorize(x);
      const double trace_error = std::abs(rho.trace() - Complex(1.0));
      if (trace_error > 10.0 * ev.trace_tolerance) {
        throw InvariantViolation("trace drifted during steady-state search", t, trace_error);
      }
      return {DensityMatrix::unchecked(std::move(rho)), t, residual};
    }
  }
  std::ostringstream msg;
  msg << "no steady state reached by t = " << t_max << ": residual ||L rho||_inf = " << residual
      << " >= " << options.convergence_tolerance;
  throw NonConvergence(msg.str(), residual, t_max);
}

namespace {

KernelBasis dense_kernel(const Liouvillian& liouvillian) {
  const ComplexMatrix generator(liouvillian.superoperator());
  Eigen::BDCSVD<ComplexMatrix> svd(generator, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double scale = std::max(1.0, sigma.size() > 0 ? sigma[0] : 0.0);
  const Eigen::Index d = liouvillian.hilbert_dimension();
  KernelBasis out;
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    if (sigma[k] < 1e-9 * scale) {
      out.elements.push_back(Eigen::Map<const ComplexMatrix>(svd.matrixV().col(k).data(), d, d));
    }
  }
  return out;
}

KernelBasis commutant_kernel(const Liouvillian& liouvillian) {
  const ComplexMatrix h = liouvillian.hamiltonian().dense();
  const ComplexMatrix l = liouvillian.jump().dense();
  const Eigen::Index d = h.rows();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw SolverBreakdown("Hamiltonian eigensolve failed");
  const auto& energies = eig.eigenvalues();
  const ComplexMatrix& vectors = eig.eigenvectors();

  // Degenerate eigenspaces of H; X commutes with H iff it is block diagonal on them.
  const double tol = 1e-9 * std::max(1.0, energies.cwiseAbs().maxCoeff());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  for (Eigen::Index start = 0; start < d;) {
    Eigen::Index stop = start + 1;
    while (stop < d && energies[stop] - energies[stop - 1] < tol) ++stop;
    blocks.emplace_back(start, stop - start);
    start = stop;
  }

  // One unknown per (p, q) pair inside each block; column = vec([L, v_p v_q^dag]).
  std::vector<std::pair<Eigen::Index, Eigen::Index>> unknowns;
  for (const auto& [start, size] : blocks) {
    for (Eigen::Index p = start; p < start + size; ++p) {
      for (Eigen::Index q = start; q < start + size; ++q) unknowns.emplace_back(p, q);
    }
  }
  const auto m = static_cast<Eigen::Index>(unknowns.size());
  KernelBasis out;
  if (liouvillian.gamma() == 0.0) {
    for (const auto& [p, q] : unknowns) {
      out.elements.push_back(vectors.col(p) * vectors.col(q).adjoint());
    }
    return out;
  }
  ComplexMatrix constraint(d * d, m);
  for (Eigen::Index u = 0; u < m; ++u) {
    const auto [p, q] = unknowns[static_cast<std::size_t>(u)];
    const ComplexMatrix x = vectors.col(p) * vectors.col(q).adjoint();
    const ComplexMatrix c = l * x - x * l;
    constraint.col(u) = Eigen::Map<const ComplexVector>(c.data(), d * d);
  }
  Eigen::BDCSVD<ComplexMatrix> svd(constraint, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double scale = std::max(1.0, sigma.size() > 0 ? sigma[0] : 0.0);

  for (Eigen::Index k = 0; k < m; ++k) {
    const double s = k < sigma.size() ? sigma[k] : 0.0;
    if (s >= 1e-9 * scale) continue;
    ComplexMatrix x = ComplexMatrix::Zero(d, d);
    for (Eigen::Index u = 0; u < m; ++u) {
      const Complex y = svd.matrixV()(u, k);
      if (y == Complex(0.0)) continue;
      const auto [p, q] = unknowns[static_cast<std::size_t>(u)];
      x += y * vectors.col(p) * vectors.col(q).adjoint();
    }
    out.elements.push_back(std::move(x));
  }
  return out;
}

}  // namespace

KernelBasis steady_state_null_space(const Liouvillian& liouvillian, KernelMethod method,
                                    double tolerance) {
  if (method == KernelMethod::kAuto) {
    method = liouvillian.dimension() <= 256 ? KernelMethod::kDense : KernelMethod::kCommutant;
  }
  KernelBasis out = method == KernelMethod::kDense ? dense_kernel(liouvillian)
                                                   : commutant_kernel(liouvillian);
  for (const auto& x : out.elements) {
    out.max_residual = std::max(out.max_residual, liouvillian.residual(x));
  }
  if (out.max_residual > tolerance) {
    std::ostringstream msg;
    msg << "kernel residual " << out.max_residual << " exceeds " << tolerance;
    throw SolverBreakdown(msg.str());
  }
  return out;
}

ComplexMatrix project_onto_kernel(const KernelBasis& kernel, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& v : kernel.elements) {
    if (v.rows() != rho.rows()) throw DimensionMismatch("project_onto_kernel: size mismatch");
    out += (v.adjoint() * rho).trace() * v;
  }
  return out;
}

double residual_of_steady_recursion(const ComplexMatrix& rho, double gamma) {
  const Eigen::Index n = rho.rows();
  if (n != rho.cols() || n == 0 || n % 2 == 0) {
    throw InvalidArgument("steady recursion needs an odd-sized single-particle density matrix");
  }
  const Eigen::Index c = (n - 1) / 2;  // zero-based centre
  auto at = [&](Eigen::Index j, Eigen::Index k) -> Complex {
    if (j < 0 || k < 0 || j >= n || k >= n) return 0.0;
    return rho(j, k);
  };
  double worst = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      Complex lhs = kI * (at(j, k + 1) + at(j, k - 1) - at(j + 1, k) - at(j - 1, k));
      if ((j == c) != (k == c)) lhs += 0.5 * gamma * rho(j, k);
      worst = std::max(worst, std::abs(lhs));
    }
  }
  return worst;
}

}  // namespace dephasing
