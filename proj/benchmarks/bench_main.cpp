#include <benchmark/benchmark.h>

#include "dephasing/dephasing.hpp"

using namespace dephasing;

namespace {

LatticeSpec spec_of(int n) {
  LatticeSpec s;
  s.n_sites = n;
  return s;
}

Liouvillian chain(int n, int particles) {
  const LatticeSpec spec = spec_of(n);
  const ManyBodyBasis basis(n, particles);
  return build_liouvillian(build_many_body_hamiltonian(spec, basis), spec.dephasing_gamma,
                           number_operator(basis, spec.center_site()));
}

std::string half_filled(int n, int particles) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int k = 0; k < particles; ++k) s[static_cast<std::size_t>(2 * k)] = '1';
  return s;
}

void BM_BuildLiouvillian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int f = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(chain(n, f));
}
BENCHMARK(BM_BuildLiouvillian)->Args({7, 1})->Args({7, 4})->Args({9, 3})->Unit(benchmark::kMillisecond);

void BM_EvolveAdaptive(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int f = static_cast<int>(state.range(1));
  const Liouvillian l = chain(n, f);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(ManyBodyBasis(n, f), half_filled(n, f)));
  const auto times = uniform_times(10.0, 11);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(rho0, l, times));
}
BENCHMARK(BM_EvolveAdaptive)->Args({5, 2})->Args({7, 4})->Unit(benchmark::kMillisecond);

void BM_EvolveExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Liouvillian l = chain(n, 1);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(ManyBodyBasis(n, 1), half_filled(n, 1)));
  EvolveOptions o;
  o.method = EvolutionMethod::kExactExponential;
  const auto times = uniform_times(10.0, 11);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(rho0, l, times, o));
}
BENCHMARK(BM_EvolveExact)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_KernelCommutant(benchmark::State& state) {
  const Liouvillian l = chain(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(steady_state_null_space(l, KernelMethod::kCommutant));
}
BENCHMARK(BM_KernelCommutant)->Args({7, 3})->Args({9, 3})->Unit(benchmark::kMillisecond);

void BM_ReduceToPair(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ManyBodyBasis basis(n, 3);
  const ComplexVector psi = fock_state(basis, half_filled(n, 3));
  const ComplexMatrix rho = psi * psi.adjoint();
  for (auto _ : state) benchmark::DoNotOptimize(concurrence(reduce_to_pair(rho, basis, 1, n)));
}
BENCHMARK(BM_ReduceToPair)->Arg(7)->Arg(9);

void BM_CorrelationEvolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ComplexMatrix c0 = ComplexMatrix::Zero(n, n);
  c0(0, 0) = 1.0;
  const CorrelationMatrix c(c0);
  const auto times = uniform_times(10.0, 11);
  for (auto _ : state) benchmark::DoNotOptimize(correlation_evolve(c, spec_of(n), times));
}
BENCHMARK(BM_CorrelationEvolve)->Arg(9)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
