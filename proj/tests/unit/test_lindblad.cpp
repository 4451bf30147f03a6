#include <doctest.h>

#include <cmath>
#include <random>

#include "dephasing/errors.hpp"
#include "dephasing/fock.hpp"
#include "dephasing/lindblad.hpp"
#include "dephasing/oracle.hpp"

using namespace dephasing;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

Liouvillian chain(const LatticeSpec& spec, const ManyBodyBasis& basis, bool trap = false) {
  return build_liouvillian(build_many_body_hamiltonian(spec, basis, trap), spec.dephasing_gamma,
                           number_operator(basis, spec.center_site()));
}

// Right-hand side written out by hand, no vectorization involved.
ComplexMatrix lindblad_rhs(const ComplexMatrix& h, double gamma, const ComplexMatrix& l, const ComplexMatrix& rho) {
  const ComplexMatrix l2 = l * l;
  return -kI * (h * rho - rho * h) + gamma * (l * rho * l - 0.5 * (l2 * rho + rho * l2));
}

ComplexMatrix random_density(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix a(d, d);
  for (auto& x : a.reshaped()) x = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

std::size_t count_zero_eigenvalues(const Liouvillian& l) {
  Eigen::ComplexEigenSolver<ComplexMatrix> eig{ComplexMatrix(l.superoperator())};
  std::size_t zeros = 0;
  for (const auto& v : eig.eigenvalues()) {
    if (std::abs(v) < 1e-9) ++zeros;
  }
  return zeros;
}

}  // namespace

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::Zero(2, 3)), InvalidArgument);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
  bad << 0.5, 0.7, 0.7, 0.5;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
  bad << 0.5, Complex(0, 0.1), Complex(0, 0.1), 0.5;
  CHECK_THROWS_AS(DensityMatrix{bad}, InvalidArgument);
  CHECK_THROWS_AS(DensityMatrix::from_pure(ComplexVector::Zero(3)), InvalidArgument);

  ComplexVector psi(2);
  psi << 3.0, Complex(0, 4.0);
  const DensityMatrix pure = DensityMatrix::from_pure(psi);
  CHECK(pure.purity() == doctest::Approx(1.0));
  CHECK(pure.invariants().ok());
  const DensityMatrix mixed(ComplexMatrix::Identity(4, 4) / 4.0);
  CHECK(mixed.purity() == doctest::Approx(0.25));
}

TEST_CASE("vectorization is column stacking") {
  ComplexMatrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const ComplexVector v = vectorize(m);
  CHECK(v[1] == Complex(3.0));
  CHECK(v[2] == Complex(2.0));
  CHECK(unvectorize(v) == m);
  CHECK_THROWS_AS(unvectorize(ComplexVector::Zero(5)), DimensionMismatch);
}

TEST_CASE("superoperator reproduces the master equation") {
  std::mt19937_64 rng(11);
  for (auto [n, k] : {std::pair{3, 1}, {5, 2}, {7, 3}}) {
    LatticeSpec spec;
    spec.n_sites = n;
    spec.dephasing_gamma = 0.8;
    spec.interaction = 0.3;
    const auto b = enumerate_basis(n, k);
    const Liouvillian l = chain(spec, b);
    const ComplexMatrix rho = random_density(b.dimension(), rng);
    const ComplexMatrix ref = lindblad_rhs(build_many_body_hamiltonian(spec, b).dense(), 0.8,
                                           number_operator(b, spec.center_site()).dense(), rho);
    CHECK(max_abs(l.apply(rho) - ref) < 1e-12);
    CHECK(max_abs(unvectorize(l.apply(vectorize(rho))) - ref) < 1e-12);
    CHECK(l.residual(rho) == doctest::Approx(max_abs(ref)));
  }
}

TEST_CASE("zero dephasing leaves the commutator") {
  LatticeSpec spec;
  spec.n_sites = 5;
  spec.dephasing_gamma = 0.0;
  const auto b = enumerate_basis(5, 2);
  const Liouvillian l = chain(spec, b);
  std::mt19937_64 rng(3);
  const ComplexMatrix rho = random_density(b.dimension(), rng);
  const ComplexMatrix h = build_many_body_hamiltonian(spec, b).dense();
  CHECK(max_abs(l.apply(rho) + kI * (h * rho - rho * h)) < 1e-13);
}

TEST_CASE("maximally mixed state is stationary") {
  LatticeSpec spec;
  spec.n_sites = 7;
  spec.dephasing_gamma = 2.5;
  const auto b = enumerate_basis(7, 3);
  const Liouvillian l = chain(spec, b);
  const Eigen::Index d = b.dimension();
  CHECK(l.residual(ComplexMatrix::Identity(d, d) / static_cast<double>(d)) < 1e-15);
}

TEST_CASE("liouvillian construction errors") {
  const auto b3 = enumerate_basis(3, 1);
  const auto b5 = enumerate_basis(5, 1);
  const OperatorMatrix h3 = build_many_body_hamiltonian(LatticeSpec{}, b3);
  CHECK_THROWS_AS(build_liouvillian(h3, 1.0, number_operator(b5, 3)), DimensionMismatch);
  CHECK_THROWS_AS(build_liouvillian(h3, -1.0, number_operator(b3, 2)), InvalidArgument);
  CHECK_THROWS_AS(build_liouvillian(bilinear_operator(b3, 1, 2), 1.0, number_operator(b3, 2)),
                  InvalidArgument);
  CHECK_THROWS_AS(build_liouvillian(h3, 1.0, bilinear_operator(b3, 1, 2)), InvalidArgument);
  const Liouvillian l = build_liouvillian(h3, 1.0, number_operator(b3, 2));
  CHECK_THROWS_AS(l.apply(ComplexMatrix(ComplexMatrix::Zero(2, 2))), DimensionMismatch);
}

TEST_CASE("evolve returns the initial state at t = 0 and follows the closed form") {
  const auto b = enumerate_basis(3, 1);
  const Liouvillian l = chain(LatticeSpec{}, b);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(b, "010"));
  const std::vector<double> zero{0.0};
  const Trajectory first = evolve(rho0, l, zero);
  REQUIRE(first.size() == 1);
  CHECK(first.states[0].matrix() == rho0.matrix());

  const auto times = uniform_times(12.0, 25);
  for (auto method : {EvolutionMethod::kAdaptive, EvolutionMethod::kExactExponential}) {
    EvolveOptions opts;
    opts.method = method;
    const Trajectory traj = evolve(rho0, l, times, opts);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const auto ref = analytic_n3_elements(traj.times[k], 1.0);
      CHECK(max_abs(traj.states[k].matrix() - ref.matrix()) < 1e-8);
    }
  }
}

TEST_CASE("adaptive and exact exponential agree on a many-body run") {
  LatticeSpec spec;
  spec.n_sites = 5;
  spec.interaction = 0.5;
  const auto b = enumerate_basis(5, 2);
  const Liouvillian l = chain(spec, b);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(b, "10100"));
  const auto times = uniform_times(6.0, 7);
  EvolveOptions exact;
  exact.method = EvolutionMethod::kExactExponential;
  const Trajectory a = evolve(rho0, l, times);
  const Trajectory e = evolve(rho0, l, times, exact);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(max_abs(a.states[k].matrix() - e.states[k].matrix()) < 1e-8);
    CHECK(a.states[k].invariants().ok());
  }
}

TEST_CASE("evolve argument checks") {
  const auto b = enumerate_basis(3, 1);
  const Liouvillian l = chain(LatticeSpec{}, b);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(b, "010"));
  const std::vector<double> backwards{1.0, 0.5};
  const std::vector<double> repeated{1.0, 1.0};
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(evolve(rho0, l, backwards), InvalidArgument);
  CHECK_THROWS_AS(evolve(rho0, l, repeated), InvalidArgument);
  CHECK_THROWS_AS(evolve(rho0, l, negative), InvalidArgument);
  const DensityMatrix wrong(ComplexMatrix::Identity(5, 5) / 5.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(evolve(wrong, l, one), DimensionMismatch);
  CHECK_THROWS_AS(uniform_times(1.0, 0), InvalidArgument);
  CHECK(uniform_times(2.0, 3) == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("an odd-mode slater state does not move") {
  LatticeSpec spec;
  spec.n_sites = 7;
  const ModeParity p = classify_mode_parity(build_single_particle_hamiltonian(spec), reflection_matrix(7));
  const auto b = enumerate_basis(7, 2);
  const int picks[] = {p.odd[0], p.odd[2]};
  const DensityMatrix rho0 = DensityMatrix::from_pure(slater_state(b, p.modes, picks));
  const Liouvillian l = chain(spec, b);
  CHECK(l.residual(rho0.matrix()) < 1e-13);
  const Trajectory traj = evolve(rho0, l, uniform_times(30.0, 7));
  for (const auto& s : traj.states) CHECK(max_abs(s.matrix() - rho0.matrix()) < 1e-9);
}

TEST_CASE("steady state by integration") {
  {
    const auto b = enumerate_basis(3, 1);
    const auto res = steady_state_by_integration(DensityMatrix::from_pure(fock_state(b, "010")),
                                                 chain(LatticeSpec{}, b));
    CHECK(res.residual < 1e-9);
    CHECK(max_abs(res.state.matrix() - analytic_steady_state(3)) < 1e-7);
  }
  {
    LatticeSpec spec;
    spec.n_sites = 5;
    const ModeParity p = classify_mode_parity(build_single_particle_hamiltonian(spec), reflection_matrix(5));
    const auto b = enumerate_basis(5, 1);
    const int ground[] = {p.even.front()};
    const auto res = steady_state_by_integration(DensityMatrix::from_pure(slater_state(b, p.modes, ground)),
                                                 chain(spec, b));
    const ComplexMatrix& rho = res.state.matrix();
    CHECK(std::abs(rho(0, 0) - 1.0 / 6) < 1e-7);
    CHECK(std::abs(rho(0, 4) - 1.0 / 6) < 1e-7);
    CHECK(std::abs(rho(1, 1) - 1.0 / 6) < 1e-7);
    CHECK(std::abs(rho(1, 3) - 1.0 / 6) < 1e-7);
    CHECK(std::abs(rho(2, 2) - 1.0 / 3) < 1e-7);
  }
}

TEST_CASE("mixed-parity fock state has no steady state") {
  LatticeSpec spec;
  spec.n_sites = 7;
  const auto b = enumerate_basis(7, 4);
  SteadyStateOptions opts;
  opts.t_max = 60.0;
  try {
    steady_state_by_integration(DensityMatrix::from_pure(fock_state(b, "1010101")), chain(spec, b), opts);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.residual() > 1e-4);
    CHECK(e.elapsed_time() == 60.0);
  }
}

TEST_CASE("steady state search needs t_max without dephasing") {
  LatticeSpec spec;
  spec.dephasing_gamma = 0.0;
  const auto b = enumerate_basis(3, 1);
  CHECK_THROWS_AS(steady_state_by_integration(DensityMatrix::from_pure(fock_state(b, "010")), chain(spec, b)),
                  InvalidArgument);
}

TEST_CASE("N=3 one-particle kernel") {
  const auto b = enumerate_basis(3, 1);
  const Liouvillian l = chain(LatticeSpec{}, b);
  for (auto method : {KernelMethod::kDense, KernelMethod::kCommutant}) {
    const KernelBasis k = steady_state_null_space(l, method);
    CHECK(k.size() == 2);
    CHECK(k.size() == count_zero_eigenvalues(l));
    const ComplexMatrix steady = analytic_steady_state(3);
    CHECK(max_abs(project_onto_kernel(k, steady) - steady) < 1e-12);
  }
}

TEST_CASE("kernel methods agree and produce an orthonormal stationary basis") {
  for (auto [n, k] : {std::pair{3, 2}, {5, 1}, {5, 2}, {7, 1}}) {
    LatticeSpec spec;
    spec.n_sites = n;
    spec.dephasing_gamma = 1.3;
    const auto b = enumerate_basis(n, k);
    const Liouvillian l = chain(spec, b);
    const KernelBasis dense = steady_state_null_space(l, KernelMethod::kDense);
    const KernelBasis comm = steady_state_null_space(l, KernelMethod::kCommutant);
    REQUIRE(dense.size() == comm.size());
    CHECK(dense.size() == count_zero_eigenvalues(l));
    for (std::size_t a = 0; a < comm.size(); ++a) {
      CHECK(l.residual(comm.elements[a]) < 1e-10);
      CHECK(max_abs(project_onto_kernel(dense, comm.elements[a]) - comm.elements[a]) < 1e-9);
      for (std::size_t c = 0; c < comm.size(); ++c) {
        const Complex ip = (comm.elements[a].adjoint() * comm.elements[c]).trace();
        CHECK(std::abs(ip - (a == c ? 1.0 : 0.0)) < 1e-10);
      }
    }
  }
}

TEST_CASE("unitary dynamics has at least d stationary directions") {
  LatticeSpec spec;
  spec.n_sites = 5;
  spec.dephasing_gamma = 0.0;
  const auto b = enumerate_basis(5, 2);
  const KernelBasis k = steady_state_null_space(chain(spec, b));
  CHECK(k.size() >= static_cast<std::size_t>(b.dimension()));
}

TEST_CASE("kernel projection is the long-time limit") {
  LatticeSpec spec;
  spec.n_sites = 5;
  const auto b = enumerate_basis(5, 2);
  const Liouvillian l = chain(spec, b);
  const DensityMatrix rho0 = DensityMatrix::from_pure(fock_state(b, "11000"));
  const ComplexMatrix predicted = project_onto_kernel(steady_state_null_space(l), rho0.matrix());
  const std::vector<double> late{400.0};
  const Trajectory traj = evolve(rho0, l, late);
  CHECK(max_abs(traj.states[0].matrix() - predicted) < 1e-6);
}

TEST_CASE("conserved charges along a trajectory") {
  LatticeSpec spec;
  spec.n_sites = 5;
  const auto b = enumerate_basis(5, 1);
  const ModeParity p = classify_mode_parity(build_single_particle_hamiltonian(spec), reflection_matrix(5));
  const int picks[] = {p.even[1]};
  const DensityMatrix rho0 = DensityMatrix::from_pure(slater_state(b, p.modes, picks));
  const Trajectory traj = evolve(rho0, chain(spec, b), uniform_times(20.0, 11));
  for (double v : conserved_charge_trace(traj, OperatorMatrix::identity(b.dimension()))) {
    CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (double v : conserved_charge_trace(traj, charge_operator(b))) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
  for (double v : conserved_charge_trace(traj, total_number_operator(b))) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(conserved_charge_trace(traj, bilinear_operator(b, 1, 2)), InvalidArgument);
}

TEST_CASE("steady recursion residual") {
  CHECK(residual_of_steady_recursion(analytic_steady_state(5), 1.0) < 1e-12);
  CHECK(residual_of_steady_recursion(analytic_steady_state(9), 1.0) < 1e-12);
  CHECK(residual_of_steady_recursion(ComplexMatrix::Identity(7, 7) / 7.0, 1.0) < 1e-12);
  const auto b = enumerate_basis(5, 1);
  LatticeSpec spec;
  spec.n_sites = 5;
  spec.dephasing_gamma = 0.7;
  const Liouvillian l = chain(spec, b);
  std::mt19937_64 rng(5);
  const ComplexMatrix rho = random_density(5, rng);
  CHECK(residual_of_steady_recursion(rho, 0.7) == doctest::Approx(l.residual(rho)).epsilon(1e-12));
  CHECK_THROWS_AS(residual_of_steady_recursion(ComplexMatrix::Identity(4, 4), 1.0), InvalidArgument);
}
