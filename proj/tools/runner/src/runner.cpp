#include "dephasing/runner/runner.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "dephasing/dephasing.hpp"

namespace dephasing::runner {

using nlohmann::json;

namespace {

constexpr double kConservationTolerance = 1e-8;
constexpr double kStateTolerance = 1e-8;

// ---------------------------------------------------------------------------------------------
// Shared setup

bool include_static_trap(const LatticeSpec& spec) { return spec.trap_amplitude != 0.0; }

EvolveOptions evolve_options(const SolverBlock& s) {
  EvolveOptions o;
  o.method = s.method == "exact" ? EvolutionMethod::kExactExponential : EvolutionMethod::kAdaptive;
  o.relative_tolerance = s.relative_tolerance;
  o.absolute_tolerance = s.absolute_tolerance;
  return o;
}

Liouvillian make_liouvillian(const LatticeSpec& spec, const ManyBodyBasis& basis, bool trap) {
  return build_liouvillian(build_many_body_hamiltonian(spec, basis, trap), spec.dephasing_gamma,
                           number_operator(basis, spec.center_site()));
}

ComplexVector initial_vector(const InitialState& init, const LatticeSpec& spec, const ManyBodyBasis& basis,
                             bool trap) {
  const int n_particles = basis.n_particles();
  const RealMatrix h = build_single_particle_hamiltonian(spec, trap);
  switch (init.kind) {
    case InitialState::Kind::kFock:
      return fock_state(basis, init.bitstring);
    case InitialState::Kind::kSlater: {
      const auto [e, modes] = single_particle_modes(h);
      return slater_state(basis, modes, init.modes);
    }
    case InitialState::Kind::kGround: {
      const auto [e, modes] = single_particle_modes(h);
      std::vector<int> picks(static_cast<std::size_t>(n_particles));
      std::iota(picks.begin(), picks.end(), 0);
      return slater_state(basis, modes, picks);
    }
    case InitialState::Kind::kEvenModes: {
      const ModeParity p = classify_mode_parity(h, reflection_matrix(spec.n_sites));
      if (static_cast<int>(p.even.size()) < n_particles) throw InvalidArgument("not enough even modes");
      const std::vector<int> picks(p.even.begin(), p.even.begin() + n_particles);
      return slater_state(basis, p.modes, picks);
    }
  }
  throw InvalidArgument("unknown initial state kind");
}

// Site token: a number, "N" (last site) or "c" (centre).
int resolve_site(const std::string& token, int n_sites) {
  if (token == "N") return n_sites;
  if (token == "c") return (n_sites + 1) / 2;
  std::size_t used = 0;
  int site = 0;
  try {
    site = std::stoi(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || site < 1 || site > n_sites) {
    throw InvalidArgument("observable site '" + token + "' is not in 1..N, 'N' or 'c'");
  }
  return site;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(part);
  return out;
}

struct Observables {
  std::vector<std::string> columns;
  std::vector<std::function<void(const ComplexMatrix&, std::vector<double>&)>> evaluators;

  std::vector<double> operator()(const ComplexMatrix& rho) const {
    std::vector<double> out;
    for (const auto& e : evaluators) e(rho, out);
    return out;
  }
};

Observables make_observables(const std::vector<std::string>& names, const ManyBodyBasis& basis,
                             const Liouvillian& liouvillian) {
  const int n = basis.n_sites();
  Observables obs;
  for (const auto& name : names) {
    const auto parts = split(name, ':');
    if (parts[0] == "corr" && parts.size() == 3) {
      const int i = resolve_site(parts[1], n);
      const int j = resolve_site(parts[2], n);
      const std::string stem = "corr_" + std::to_string(i) + "_" + std::to_string(j);
      obs.columns.insert(obs.columns.end(), {stem + "_re", stem + "_im", stem + "_abs"});
      obs.evaluators.push_back([op = bilinear_operator(basis, i, j)](const ComplexMatrix& rho, std::vector<double>& out) {
        const Complex v = op.expectation(rho);
        out.insert(out.end(), {v.real(), v.imag(), std::abs(v)});
      });
    } else if (parts[0] == "n" && parts.size() == 2) {
      const int i = resolve_site(parts[1], n);
      obs.columns.push_back("n_" + std::to_string(i));
      obs.evaluators.push_back([op = number_operator(basis, i)](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(op.expectation(rho).real());
      });
    } else if (parts[0] == "concurrence" && parts.size() == 3) {
      const int i = resolve_site(parts[1], n);
      const int j = resolve_site(parts[2], n);
      obs.columns.push_back("concurrence_" + std::to_string(i) + "_" + std::to_string(j));
      obs.evaluators.push_back([&basis, i, j](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(concurrence(reduce_to_pair(rho, basis, i, j)));
      });
    } else if (name == "purity") {
      obs.columns.push_back("purity");
      obs.evaluators.push_back([](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back((rho * rho).trace().real());
      });
    } else if (name == "trace") {
      obs.columns.push_back("trace");
      obs.evaluators.push_back([](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(rho.trace().real());
      });
    } else if (name == "charge") {
      obs.columns.push_back("charge");
      obs.evaluators.push_back([op = charge_operator(basis)](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(op.expectation(rho).real());
      });
    } else if (name == "number") {
      OperatorMatrix total = number_operator(basis, 1);
      for (int i = 2; i <= n; ++i) total = total + number_operator(basis, i);
      obs.columns.push_back("number");
      obs.evaluators.push_back([op = std::move(total)](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(op.expectation(rho).real());
      });
    } else if (name == "residual") {
      obs.columns.push_back("residual");
      obs.evaluators.push_back([&liouvillian](const ComplexMatrix& rho, std::vector<double>& out) {
        out.push_back(liouvillian.residual(rho));
      });
    } else {
      throw InvalidArgument("unknown observable '" + name + "'");
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------------------------
// Invariant bookkeeping

struct InvariantTracker {
  double hermiticity = 0.0;
  double trace = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double number_drift = 0.0;
  double charge_drift = 0.0;
  double parity_drift = 0.0;
  bool charge_tracked = false;
  bool parity_tracked = false;

  void absorb(const InvariantTracker& o) {
    hermiticity = std::max(hermiticity, o.hermiticity);
    trace = std::max(trace, o.trace);
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    number_drift = std::max(number_drift, o.number_drift);
    charge_drift = std::max(charge_drift, o.charge_drift);
    parity_drift = std::max(parity_drift, o.parity_drift);
    charge_tracked = charge_tracked || o.charge_tracked;
    parity_tracked = parity_tracked || o.parity_tracked;
  }

  void state(const ComplexMatrix& rho) {
    const DensityInvariants inv = DensityMatrix::unchecked(rho).invariants();
    hermiticity = std::max(hermiticity, inv.hermiticity_error);
    trace = std::max(trace, inv.trace_error);
    min_eigenvalue = std::min(min_eigenvalue, inv.min_eigenvalue);
  }

  void emit(std::vector<InvariantCheck>& out) const {
    out.push_back({"max_hermiticity_error", hermiticity, kStateTolerance, hermiticity < kStateTolerance});
    out.push_back({"max_trace_error", trace, kStateTolerance, trace < kStateTolerance});
    out.push_back({"min_eigenvalue", min_eigenvalue, -kStateTolerance, min_eigenvalue > -kStateTolerance});
    out.push_back({"number_drift", number_drift, kConservationTolerance, number_drift < kConservationTolerance});
    if (charge_tracked) {
      out.push_back({"charge_drift", charge_drift, kConservationTolerance, charge_drift < kConservationTolerance});
    }
    if (parity_tracked) {
      out.push_back({"parity_population_drift", parity_drift, kConservationTolerance,
                     parity_drift < kConservationTolerance});
    }
  }
};

// Tracks every state of a trajectory plus the conserved quantities that the Hamiltonian respects.
InvariantTracker track_trajectory(const std::vector<ComplexMatrix>& states, const ManyBodyBasis& basis,
                                  const Liouvillian& liouvillian) {
  InvariantTracker t;
  if (states.empty()) return t;
  for (const auto& rho : states) t.state(rho);

  const int n = basis.n_sites();
  OperatorMatrix number = number_operator(basis, 1);
  for (int i = 2; i <= n; ++i) number = number + number_operator(basis, i);
  const double n0 = number.expectation(states.front()).real();
  for (const auto& rho : states) t.number_drift = std::max(t.number_drift, std::abs(number.expectation(rho).real() - n0));

  const OperatorMatrix& h = liouvillian.hamiltonian();
  const OperatorMatrix& l = liouvillian.jump();
  const double scale = std::max(1.0, h.max_abs());
  const OperatorMatrix charge = charge_operator(basis);
  if (commutator(h, charge).max_abs() < 1e-12 * scale && commutator(l, charge).max_abs() < 1e-12) {
    t.charge_tracked = true;
    const double c0 = charge.expectation(states.front()).real();
    for (const auto& rho : states) t.charge_drift = std::max(t.charge_drift, std::abs(charge.expectation(rho).real() - c0));
  }
  const OperatorMatrix reflection = reflection_operator(basis);
  if (commutator(h, reflection).max_abs() < 1e-12 * scale && commutator(l, reflection).max_abs() < 1e-12) {
    t.parity_tracked = true;
    const auto [even, odd] = parity_projectors(basis);
    const double p0 = (even * states.front()).trace().real();
    for (const auto& rho : states) t.parity_drift = std::max(t.parity_drift, std::abs((even * rho).trace().real() - p0));
  }
  return t;
}

std::vector<ComplexMatrix> matrices(const Trajectory& traj) {
  std::vector<ComplexMatrix> out;
  out.reserve(traj.size());
  for (const auto& s : traj.states) out.push_back(s.matrix());
  return out;
}

json matrix_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ii = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"real", re}, {"imag", im}};
}

Table matrix_table(const ComplexMatrix& m, const std::string& row_name, const std::string& col_name) {
  Table t;
  t.columns = {row_name, col_name, "re", "im", "abs"};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      t.add_row({static_cast<double>(r + 1), static_cast<double>(c + 1), m(r, c).real(), m(r, c).imag(),
                 std::abs(m(r, c))});
    }
  }
  return t;
}

json symmetric_pair_concurrences(const ComplexMatrix& rho, const ManyBodyBasis& basis) {
  const int n = basis.n_sites();
  json pairs = json::array();
  for (int i = 1; i < (n + 1) / 2; ++i) {
    const TwoSiteRDM rdm = reduce_to_pair(rho, basis, i, n + 1 - i);
    pairs.push_back({{"i", i}, {"j", n + 1 - i}, {"concurrence", concurrence(rdm)}, {"negativity", negativity(rdm)}});
  }
  return pairs;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// ---------------------------------------------------------------------------------------------
// Experiments

RunResult run_evolve(const ExperimentConfig& c) {
  RunResult out;
  const LatticeSpec& spec = c.lattice;
  const ManyBodyBasis basis(spec.n_sites, c.particles);
  const bool trap = include_static_trap(spec);
  const Liouvillian l = make_liouvillian(spec, basis, trap);
  const DensityMatrix rho0 = DensityMatrix::from_pure(initial_vector(c.initial, spec, basis, trap));
  const auto times = c.time.resolve();
  const Trajectory traj = evolve(rho0, l, times, evolve_options(c.solver));

  const Observables obs = make_observables(c.observables, basis, l);
  Table table;
  table.columns = {"t"};
  table.columns.insert(table.columns.end(), obs.columns.begin(), obs.columns.end());
  json initial, final;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row{traj.times[k]};
    const auto values = obs(traj.states[k].matrix());
    row.insert(row.end(), values.begin(), values.end());
    table.add_row(std::move(row));
  }
  const auto v0 = obs(rho0.matrix());
  const auto v1 = obs(traj.states.back().matrix());
  for (std::size_t k = 0; k < obs.columns.size(); ++k) {
    initial[obs.columns[k]] = v0[k];
    final[obs.columns[k]] = v1[k];
  }
  out.tables["evolve"] = std::move(table);
  out.results = {{"samples", traj.size()}, {"initial", initial}, {"final", final}, {"t_final", traj.times.back()}};
  track_trajectory(matrices(traj), basis, l).emit(out.invariants);
  return out;
}

RunResult run_steady(const ExperimentConfig& c) {
  RunResult out;
  const LatticeSpec& spec = c.lattice;
  const ManyBodyBasis basis(spec.n_sites, c.particles);
  const bool trap = include_static_trap(spec);
  const Liouvillian l = make_liouvillian(spec, basis, trap);
  const DensityMatrix rho0 = DensityMatrix::from_pure(initial_vector(c.initial, spec, basis, trap));
  SteadyStateOptions opts;
  opts.convergence_tolerance = c.solver.steady_tolerance;
  opts.t_max = c.solver.t_max;
  opts.evolve = evolve_options(c.solver);
  const SteadyStateResult res = steady_state_by_integration(rho0, l, opts);
  const ComplexMatrix& rho = res.state.matrix();
  const CorrelationMatrix corr = correlation_from_state(rho, basis);

  out.tables["steady_density"] = matrix_table(rho, "row", "col");
  out.tables["steady_correlation"] = matrix_table(corr.matrix(), "i", "j");
  out.results = {{"residual", res.residual},
                 {"elapsed_time", res.elapsed_time},
                 {"purity", res.state.purity()},
                 {"correlation_matrix", matrix_json(corr.matrix())},
                 {"symmetric_pairs", symmetric_pair_concurrences(rho, basis)}};
  if (rho.rows() <= OperatorMatrix::kDenseLimit) out.results["density_matrix"] = matrix_json(rho);
  if (c.particles == 1 && !trap && spec.aa_amplitude == 0.0) {
    out.results["max_deviation_from_analytic"] = (rho - analytic_steady_state(spec.n_sites)).cwiseAbs().maxCoeff();
  }

  out.invariants.push_back({"steady_residual", res.residual, c.solver.steady_tolerance,
                            res.residual < c.solver.steady_tolerance});
  InvariantTracker t;
  t.state(rho);
  t.emit(out.invariants);
  return out;
}

RunResult run_correlation_map(const ExperimentConfig& c) {
  RunResult out;
  const LatticeSpec& spec = c.lattice;
  const ManyBodyBasis basis(spec.n_sites, c.particles);
  const bool trap = include_static_trap(spec);
  const ComplexVector psi = initial_vector(c.initial, spec, basis, trap);
  const ComplexMatrix rho0 = psi * psi.adjoint();
  const double t_max = c.solver.t_max.value_or(1e4 / std::max(spec.dephasing_gamma, 1e-12));
  const double chunk = 10.0;

  ComplexMatrix steady;
  double elapsed = 0.0;
  double residual = 0.0;
  std::string method;
  if (spec.interaction == 0.0) {
    // Quadratic problem: integrate the N x N correlation matrix until it stops moving.
    method = "correlation";
    const RealMatrix h = build_single_particle_hamiltonian(spec, trap);
    CorrelationEvolveOptions opts;
    opts.relative_tolerance = std::min(c.solver.relative_tolerance, 1e-10);
    opts.absolute_tolerance = std::min(c.solver.absolute_tolerance, 1e-13);
    CorrelationMatrix current = correlation_from_state(rho0, basis);
    residual = correlation_derivative(current.matrix(), h, spec.dephasing_gamma, spec.center_site()).cwiseAbs().maxCoeff();
    const std::vector<double> step{chunk};
    while (residual >= c.solver.steady_tolerance && elapsed < t_max) {
      current = correlation_evolve(current, h, spec.dephasing_gamma, spec.center_site(), step, opts).back();
      elapsed += chunk;
      residual = correlation_derivative(current.matrix(), h, spec.dephasing_gamma, spec.center_site()).cwiseAbs().maxCoeff();
    }
    if (residual >= c.solver.steady_tolerance) {
      std::ostringstream msg;
      msg << "no steady correlation matrix reached by t = " << t_max << ": residual ||dC/dt||_inf = " << residual;
      throw NonConvergence(msg.str(), residual, t_max);
    }
    steady = current.matrix();
  } else {
    method = "liouvillian";
    SteadyStateOptions opts;
    opts.convergence_tolerance = c.solver.steady_tolerance;
    opts.t_max = c.solver.t_max;
    opts.evolve = evolve_options(c.solver);
    const auto res = steady_state_by_integration(DensityMatrix(rho0), make_liouvillian(spec, basis, trap), opts);
    steady = correlation_from_state(res.state.matrix(), basis).matrix();
    elapsed = res.elapsed_time;
    residual = res.residual;
  }

  out.tables["correlation_map"] = matrix_table(steady, "i", "j");
  out.results = {{"method", method},
                 {"elapsed_time", elapsed},
                 {"residual", residual},
                 {"correlation_matrix", matrix_json(steady)}};
  if (!trap && spec.aa_amplitude == 0.0 && spec.interaction == 0.0 && c.particles >= 1 &&
      c.particles <= (spec.n_sites + 1) / 2) {
    const ComplexMatrix predicted = static_cast<double>(c.particles) * analytic_steady_state(spec.n_sites).transpose();
    out.results["max_deviation_from_scaling_law"] = (steady - predicted).cwiseAbs().maxCoeff();
  }

  const CorrelationMatrix cm = CorrelationMatrix::unchecked(steady);
  const RealVector ev = cm.eigenvalues();
  const double herm = (steady - steady.adjoint()).cwiseAbs().maxCoeff();
  const double number = std::abs(cm.particle_number() - c.particles);
  out.invariants.push_back({"steady_residual", residual, c.solver.steady_tolerance, residual < c.solver.steady_tolerance});
  out.invariants.push_back({"hermiticity_error", herm, kStateTolerance, herm < kStateTolerance});
  out.invariants.push_back({"number_drift", number, kConservationTolerance, number < kConservationTolerance});
  out.invariants.push_back({"min_occupation", ev.minCoeff(), -kStateTolerance, ev.minCoeff() > -kStateTolerance});
  out.invariants.push_back({"max_occupation", ev.maxCoeff(), 1.0 + kStateTolerance, ev.maxCoeff() < 1.0 + kStateTolerance});
  return out;
}

struct ScanCase {
  int n_sites = 0;
  int particles = 0;
  std::vector<std::array<double, 4>> pairs;  // i, concurrence, negativity, x-state concurrence
  double kernel_residual = 0.0;
  std::size_t kernel_dimension = 0;
  InvariantTracker tracker;
};

RunResult run_concurrence_scan(const ExperimentConfig& c) {
  RunResult out;
  std::vector<std::pair<int, int>> jobs;
  json skipped = json::array();
  for (int n : c.scan.sizes) {
    for (int f : c.scan.fillings) {
      if (f <= (n + 1) / 2) {
        jobs.emplace_back(n, f);
      } else {
        skipped.push_back({{"n_sites", n}, {"particles", f}, {"reason", "more particles than even modes"}});
      }
    }
  }

  const auto cases = parallel_map(jobs.size(), c.solver.threads, [&](std::size_t k) {
    const auto [n, f] = jobs[k];
    LatticeSpec spec = c.lattice;
    spec.n_sites = n;
    spec.trap_center.reset();
    const ManyBodyBasis basis(n, f);
    const bool trap = include_static_trap(spec);
    InitialState init;
    init.kind = InitialState::Kind::kEvenModes;
    const ComplexVector psi = initial_vector(init, spec, basis, trap);
    const Liouvillian l = make_liouvillian(spec, basis, trap);
    const KernelBasis kernel = steady_state_null_space(l);
    const ComplexMatrix rho = project_onto_kernel(kernel, psi * psi.adjoint());

    ScanCase sc;
    sc.n_sites = n;
    sc.particles = f;
    sc.kernel_residual = l.residual(rho);
    sc.kernel_dimension = kernel.size();
    sc.tracker.state(rho);
    for (int i = 1; i < (n + 1) / 2; ++i) {
      const TwoSiteRDM rdm = reduce_to_pair(rho, basis, i, n + 1 - i);
      sc.pairs.push_back({static_cast<double>(i), concurrence(rdm), negativity(rdm), x_state_concurrence(rdm)});
    }
    return sc;
  });

  Table table;
  table.columns = {"n_sites", "particles", "i", "j", "concurrence", "negativity", "closed_form"};
  json listing = json::array();
  InvariantTracker tracker;
  double kernel_residual = 0.0;
  std::map<int, std::vector<std::pair<int, double>>> by_size;
  for (const auto& sc : cases) {
    const double closed = 2.0 * sc.particles / (sc.n_sites + 1.0);
    for (const auto& p : sc.pairs) {
      table.add_row({static_cast<double>(sc.n_sites), static_cast<double>(sc.particles), p[0],
                     static_cast<double>(sc.n_sites + 1) - p[0], p[1], p[2], closed});
    }
    const double end_to_end = sc.pairs.front()[1];
    by_size[sc.n_sites].emplace_back(sc.particles, end_to_end);
    listing.push_back({{"n_sites", sc.n_sites},
                       {"particles", sc.particles},
                       {"concurrence_1N", end_to_end},
                       {"x_state_concurrence_1N", sc.pairs.front()[3]},
                       {"closed_form", closed},
                       {"kernel_dimension", sc.kernel_dimension}});
    tracker.absorb(sc.tracker);
    kernel_residual = std::max(kernel_residual, sc.kernel_residual);
  }
  bool monotone = true;
  for (auto& [n, series] : by_size) {
    std::sort(series.begin(), series.end());
    for (std::size_t k = 1; k < series.size(); ++k) monotone = monotone && series[k].second >= series[k - 1].second;
  }
  out.tables["concurrence_scan"] = std::move(table);
  out.results = {{"cases", listing}, {"skipped", skipped}, {"monotone_in_filling", monotone}};
  out.invariants.push_back({"max_kernel_residual", kernel_residual, 1e-10, kernel_residual < 1e-10});
  tracker.emit(out.invariants);
  return out;
}

std::vector<double> local_maxima_times(const std::vector<double>& t, const std::vector<double>& y, double from) {
  std::vector<double> out;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (t[k] >= from && y[k] > y[k - 1] && y[k] >= y[k + 1]) out.push_back(t[k]);
  }
  return out;
}

RunResult run_fock_quench(const ExperimentConfig& c) {
  RunResult out;
  LatticeSpec spec = c.lattice;
  spec.trap_amplitude = 0.0;
  const ManyBodyBasis basis(spec.n_sites, c.particles);
  const Liouvillian bare = make_liouvillian(spec, basis, false);
  const DensityMatrix rho0 = DensityMatrix::from_pure(initial_vector(c.initial, spec, basis, false));
  const auto grid = c.time.resolve();
  const EvolveOptions opts = evolve_options(c.solver);
  const Trajectory unquenched = evolve(rho0, bare, grid, opts);
  const OperatorMatrix end_to_end = bilinear_operator(basis, 1, spec.n_sites);

  std::vector<double> abs_unq(grid.size()), res_unq(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    abs_unq[k] = std::abs(end_to_end.expectation(unquenched.states[k].matrix()));
    res_unq[k] = bare.residual(unquenched.states[k].matrix());
  }

  double t_q = c.quench.time;
  if (c.quench.auto_detect) {
    const auto peaks = local_maxima_times(grid, abs_unq, c.quench.transient);
    if (peaks.empty()) throw InvalidArgument("quench.auto_detect: no local maximum after quench.transient");
    t_q = peaks.front();
  }
  if (t_q > grid.back()) throw InvalidArgument("quench.time lies beyond the time grid");

  // State at the quench instant; reuse the grid sample when it coincides.
  ComplexMatrix rho_q;
  std::size_t first_post = grid.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k] - t_q) < 1e-9) rho_q = unquenched.states[k].matrix();
    if (grid[k] > t_q + 1e-9) {
      first_post = k;
      break;
    }
  }
  if (rho_q.size() == 0) {
    const std::vector<double> at{t_q};
    rho_q = evolve(rho0, bare, at, opts).states.front().matrix();
  }

  LatticeSpec trapped = spec;
  trapped.trap_amplitude = c.quench.trap_amplitude;
  const Liouvillian quenched = make_liouvillian(trapped, basis, true);
  std::vector<double> shifted;
  for (std::size_t k = first_post; k < grid.size(); ++k) shifted.push_back(grid[k] - t_q);
  Trajectory post;
  if (!shifted.empty()) post = evolve(DensityMatrix::unchecked(rho_q), quenched, shifted, opts);

  Table table;
  table.columns = {"t", "segment", "quench_marker", "corr_re", "corr_im", "corr_abs", "residual",
                   "corr_abs_unquenched", "residual_unquenched"};
  bool marker_written = false;
  std::vector<double> post_abs;
  double pre_max = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!marker_written && grid[k] > t_q - 1e-9) {
      const Complex v = end_to_end.expectation(rho_q);
      table.add_row({t_q, 0.0, 1.0, v.real(), v.imag(), std::abs(v), bare.residual(rho_q), std::abs(v),
                     bare.residual(rho_q)});
      post_abs.push_back(std::abs(v));
      pre_max = std::max(pre_max, std::abs(v));
      marker_written = true;
      if (std::abs(grid[k] - t_q) < 1e-9) continue;
    }
    if (k < first_post) {
      const Complex v = end_to_end.expectation(unquenched.states[k].matrix());
      table.add_row({grid[k], 0.0, 0.0, v.real(), v.imag(), abs_unq[k], res_unq[k], abs_unq[k], res_unq[k]});
      if (grid[k] >= t_q - c.quench.pre_window) pre_max = std::max(pre_max, abs_unq[k]);
    } else {
      const ComplexMatrix& rho = post.states[k - first_post].matrix();
      const Complex v = end_to_end.expectation(rho);
      table.add_row({grid[k], 1.0, 0.0, v.real(), v.imag(), std::abs(v), quenched.residual(rho), abs_unq[k], res_unq[k]});
      if (grid[k] <= t_q + c.quench.post_window + 1e-9) post_abs.push_back(std::abs(v));
    }
  }

  double min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] >= c.quench.transient) min_residual = std::min(min_residual, res_unq[k]);
  }
  const double post_mean = std::accumulate(post_abs.begin(), post_abs.end(), 0.0) / static_cast<double>(post_abs.size());
  const auto peaks = local_maxima_times(grid, abs_unq, c.quench.transient);
  std::vector<double> spacing;
  for (std::size_t k = 1; k < peaks.size(); ++k) spacing.push_back(peaks[k] - peaks[k - 1]);

  out.tables["fock_quench"] = std::move(table);
  out.results = {{"quench_time", t_q},
                 {"pre_quench_max", pre_max},
                 {"post_quench_mean", post_mean},
                 {"retention_ratio", pre_max > 0.0 ? post_mean / pre_max : 0.0},
                 {"post_window_end", std::min(t_q + c.quench.post_window, grid.back())},
                 {"min_unquenched_residual", min_residual},
                 {"unquenched_peak_times", peaks},
                 {"unquenched_peak_spacing", spacing}};

  InvariantTracker tracker = track_trajectory(matrices(unquenched), basis, bare);
  if (!shifted.empty()) tracker.absorb(track_trajectory(matrices(post), basis, quenched));
  tracker.emit(out.invariants);
  return out;
}

RunResult run_robustness(const ExperimentConfig& c, bool aa) {
  RunResult out;
  const auto values = c.scan.resolve_values();
  const int n = c.lattice.n_sites;
  const int pi = c.scan.pair_i;
  const int pj = c.scan.pair_j == 0 ? n : c.scan.pair_j;

  struct Point {
    std::vector<std::array<double, 3>> rows;  // t, concurrence, negativity
    InvariantTracker tracker;
  };
  const auto points = parallel_map(values.size(), c.solver.threads, [&](std::size_t k) {
    LatticeSpec spec = c.lattice;
    (aa ? spec.aa_amplitude : spec.interaction) = values[k];
    const ManyBodyBasis basis(n, c.particles);
    const bool trap = include_static_trap(spec);
    const Liouvillian l = make_liouvillian(spec, basis, trap);
    const DensityMatrix rho0 = DensityMatrix::from_pure(initial_vector(c.initial, spec, basis, trap));
    const Trajectory traj = evolve(rho0, l, c.scan.times, evolve_options(c.solver));
    Point p;
    for (std::size_t s = 0; s < traj.size(); ++s) {
      const TwoSiteRDM rdm = reduce_to_pair(traj.states[s].matrix(), basis, pi, pj);
      p.rows.push_back({traj.times[s], concurrence(rdm), negativity(rdm)});
    }
    auto states = matrices(traj);
    states.insert(states.begin(), rho0.matrix());
    p.tracker = track_trajectory(states, basis, l);
    return p;
  });

  Table table;
  table.columns = {aa ? "aa_amplitude" : "interaction", "t", "concurrence", "negativity"};
  InvariantTracker tracker;
  std::map<double, std::vector<double>> by_time;
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (const auto& r : points[k].rows) {
      table.add_row({values[k], r[0], r[1], r[2]});
      by_time[r[0]].push_back(r[1]);
    }
    tracker.absorb(points[k].tracker);
  }
  json per_time = json::array();
  for (const auto& [t, conc] : by_time) {
    const LinearFit fit = fit_line(values, conc);
    per_time.push_back({{"t", t}, {"concurrence", conc}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}});
  }
  out.tables[aa ? "robustness_aa" : "robustness_int"] = std::move(table);
  out.results = {{"parameter", aa ? "aa_amplitude" : "interaction"},
                 {"values", values},
                 {"pair", {pi, pj}},
                 {"per_time", per_time}};
  tracker.emit(out.invariants);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw DimensionMismatch("table row has wrong width");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw InvalidArgument("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

bool RunResult::invariants_ok() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const InvariantCheck& c) { return c.passed; });
}

json RunResult::summary() const {
  json checks = json::array();
  for (const auto& c : invariants) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
  }
  json files = json::array();
  for (const auto& [stem, table] : tables) files.push_back(stem + ".csv");
  return {{"experiment", std::string(to_string(config.kind))},
          {"config", to_json(config)},
          {"results", results},
          {"invariants", {{"passed", invariants_ok()}, {"checks", checks}}},
          {"outputs", files}};
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  RunResult r;
  switch (config.kind) {
    case ExperimentKind::kEvolve: r = run_evolve(config); break;
    case ExperimentKind::kSteady: r = run_steady(config); break;
    case ExperimentKind::kCorrelationMap: r = run_correlation_map(config); break;
    case ExperimentKind::kConcurrenceScan: r = run_concurrence_scan(config); break;
    case ExperimentKind::kFockQuench: r = run_fock_quench(config); break;
    case ExperimentKind::kRobustnessAA: r = run_robustness(config, true); break;
    case ExperimentKind::kRobustnessInt: r = run_robustness(config, false); break;
  }
  r.config = config;
  return r;
}

}  // namespace dephasing::runner
