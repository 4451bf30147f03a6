#include <map>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "dephasing/errors.hpp"
#include "dephasing/lindblad.hpp"
#include "integrator.hpp"

namespace dephasing {

namespace {

void check_sample(const ComplexMatrix& rho, double t, const EvolveOptions& options) {
  const DensityMatrix view = DensityMatrix::unchecked(rho);
  const DensityInvariants inv = options.check_positivity
                                    ? view.invariants()
                                    : DensityInvariants{(rho - rho.adjoint()).cwiseAbs().maxCoeff(),
                                                        std::abs(rho.trace() - Complex(1.0)), 0.0};
  auto fail = [&](const char* name, double value, double limit) {
    std::ostringstream msg;
    msg << name << " violated at t = " << t << ": " << value << " (abort threshold " << limit << ")";
    throw InvariantViolation(msg.str(), t, value);
  };
  if (inv.trace_error > 10.0 * options.trace_tolerance) {
    fail("trace preservation", inv.trace_error, 10.0 * options.trace_tolerance);
  }
  if (inv.hermiticity_error > 10.0 * options.hermiticity_tolerance) {
    fail("hermiticity", inv.hermiticity_error, 10.0 * options.hermiticity_tolerance);
  }
  if (inv.min_eigenvalue < -10.0 * options.positivity_tolerance) {
    fail("positivity", inv.min_eigenvalue, -10.0 * options.positivity_tolerance);
  }
}

void check_times(std::span<const double> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0) throw InvalidArgument("evolve: sample times must be non-negative");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw InvalidArgument("evolve: sample times must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> uniform_times(double t_final, std::size_t samples) {
  if (samples == 0) throw InvalidArgument("uniform_times: need at least one sample");
  if (samples == 1) return {t_final};
  std::vector<double> out(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out[k] = t_final * static_cast<double>(k) / static_cast<double>(samples - 1);
  }
  return out;
}

Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& liouvillian,
                  std::span<const double> sample_times, const EvolveOptions& options) {
  if (rho0.dimension() != liouvillian.hilbert_dimension()) {
    throw DimensionMismatch("evolve: initial state and Liouvillian dimensions differ");
  }
  check_times(sample_times);

  Trajectory out;
  out.times.assign(sample_times.begin(), sample_times.end());
  out.states.reserve(sample_times.size());
  const ComplexVector x0 = vectorize(rho0.matrix());

  if (options.method == EvolutionMethod::kExactExponential) {
    if (liouvillian.dimension() > options.max_dense_dimension) {
      throw InvalidArgument("exact-exponential evolution limited to superoperators with at most " +
                            std::to_string(options.max_dense_dimension) + " rows");
    }
    const ComplexMatrix generator(liouvillian.superoperator());
    std::map<double, ComplexMatrix> propagators;
    ComplexVector x = x0;
    double t = 0.0;
    for (double target : sample_times) {
      const double step = target - t;
      if (step > 0.0) {
        auto it = propagators.find(step);
        if (it == propagators.end()) {
          it = propagators.emplace(step, ComplexMatrix((generator * step).exp())).first;
        }
        x = it->second * x;
        t = target;
      }
      ComplexMatrix rho = unvectorize(x);
      check_sample(rho, target, options);
      out.states.push_back(DensityMatrix::unchecked(std::move(rho)));
    }
    return out;
  }

  detail::AdaptiveIntegrator integrator(
      [&liouvillian](const ComplexVector& x, ComplexVector& dxdt) { dxdt = liouvillian.apply(x); },
      x0, 0.0, options.relative_tolerance, options.absolute_tolerance, options.initial_step);
  for (double target : sample_times) {
    ComplexMatrix rho = target == 0.0 ? rho0.matrix() : unvectorize(integrator.advance_to(target));
    check_sample(rho, target, options);
    out.states.push_back(DensityMatrix::unchecked(std::move(rho)));
  }
  return out;
}

std::vector<double> conserved_charge_trace(const Trajectory& trajectory, const ComplexMatrix& op) {
  if ((op - op.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("conserved_charge_trace: operator must be Hermitian");
  }
  std::vector<double> out;
  out.reserve(trajectory.size());
  for (const auto& rho : trajectory.states) out.push_back((rho.matrix() * op).trace().real());
  return out;
}

std::vector<double> conserved_charge_trace(const Trajectory& trajectory, const OperatorMatrix& op) {
  return conserved_charge_trace(trajectory, op.dense());
}

}  // namespace dephasing
