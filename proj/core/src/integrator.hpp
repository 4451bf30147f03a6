#pragma once

#include <functional>
#include <memory>

#include "dephasing/types.hpp"

namespace dephasing::detail {

/// Dormand-Prince 5(4) with embedded error control and dense output, advanced monotonically.
class AdaptiveIntegrator {
 public:
  using Rhs = std::function<void(const ComplexVector& x, ComplexVector& dxdt)>;

  AdaptiveIntegrator(Rhs rhs, const ComplexVector& x0, double t0, double relative_tolerance,
                     double absolute_tolerance, double initial_step);
  ~AdaptiveIntegrator();
  AdaptiveIntegrator(AdaptiveIntegrator&&) noexcept;
  AdaptiveIntegrator& operator=(AdaptiveIntegrator&&) noexcept;

  /// State at time t >= the last requested time. Throws IntegrationError on step underflow.
  ComplexVector advance_to(double t);

  std::size_t steps_taken() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dephasing::detail
