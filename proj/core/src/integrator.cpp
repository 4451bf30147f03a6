#include "integrator.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "dephasing/errors.hpp"

namespace dephasing::detail {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<Complex>;
using Stepper = odeint::runge_kutta_dopri5<State>;
using DenseStepper = odeint::result_of::make_dense_output<Stepper>::type;

Eigen::Map<const ComplexVector> view(const State& s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace

struct AdaptiveIntegrator::Impl {
  Rhs rhs;
  DenseStepper stepper;
  double requested = 0.0;
  std::size_t steps = 0;
  ComplexVector scratch_in;
  ComplexVector scratch_out;

  void operator()(const State& x, State& dxdt, double /*t*/) {
    scratch_in = view(x);
    rhs(scratch_in, scratch_out);
    dxdt.assign(scratch_out.data(), scratch_out.data() + scratch_out.size());
  }
};

AdaptiveIntegrator::AdaptiveIntegrator(Rhs rhs, const ComplexVector& x0, double t0,
                                       double relative_tolerance, double absolute_tolerance,
                                       double initial_step)
    : impl_(std::make_unique<Impl>(Impl{
          std::move(rhs),
          odeint::make_dense_output(absolute_tolerance, relative_tolerance, Stepper()),
          t0, 0, ComplexVector(), ComplexVector()})) {
  const State initial(x0.data(), x0.data() + x0.size());
  impl_->stepper.initialize(initial, t0, initial_step);
}

AdaptiveIntegrator::~AdaptiveIntegrator() = default;
AdaptiveIntegrator::AdaptiveIntegrator(AdaptiveIntegrator&&) noexcept = default;
AdaptiveIntegrator& AdaptiveIntegrator::operator=(AdaptiveIntegrator&&) noexcept = default;

ComplexVector AdaptiveIntegrator::advance_to(double t) {
  auto& s = *impl_;
  if (t < s.requested) throw IntegrationError("integrator cannot step backwards");
  s.requested = t;
  auto system = [&s](const State& x, State& dxdt, double time) { s(x, dxdt, time); };
  try {
    while (s.stepper.current_time() < t) {
      const double dt = s.stepper.current_time_step();
      if (!(dt > 1e-14 * std::max(1.0, std::abs(s.stepper.current_time())))) {
        throw IntegrationError("step size underflow at t = " +
                               std::to_string(s.stepper.current_time()) +
                               " (dt = " + std::to_string(dt) + ")");
      }
      s.stepper.do_step(system);
      ++s.steps;
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw IntegrationError(std::string("step adjustment failed: ") + e.what());
  }
  if (t == s.stepper.current_time()) return view(s.stepper.current_state());
  State out(s.stepper.current_state().size());
  s.stepper.calc_state(t, out);
  return view(out);
}

std::size_t AdaptiveIntegrator::steps_taken() const noexcept { return impl_->steps; }

}  // namespace dephasing::detail
