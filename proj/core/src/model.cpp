#include "dephasing/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dephasing/errors.hpp"

namespace dephasing {

void LatticeSpec::validate() const {
  if (n_sites < 1 || n_sites % 2 == 0) {
    throw InvalidArgument("n_sites must be a positive odd integer, got " + std::to_string(n_sites));
  }
  if (!(tunneling > 0.0)) throw InvalidArgument("tunneling must be positive");
  if (dephasing_gamma < 0.0) throw InvalidArgument("dephasing_gamma must be non-negative");
  if (aa_amplitude < 0.0) throw InvalidArgument("aa_amplitude must be non-negative");
  if (trap_amplitude < 0.0) throw InvalidArgument("trap_amplitude must be non-negative");
  if (interaction < 0.0) throw InvalidArgument("interaction must be non-negative");
  if (trap_center && (*trap_center < 1 || *trap_center > n_sites)) {
    throw InvalidArgument("trap_center must lie in 1..n_sites");
  }
}

RealMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, bool include_trap) {
  spec.validate();
  const int n = spec.n_sites;
  RealMatrix h = RealMatrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = -spec.tunneling;
    h(i + 1, i) = -spec.tunneling;
  }
  const int ic = spec.resolved_trap_center();
  for (int site = 1; site <= n; ++site) {
    double onsite = 0.0;
    if (spec.aa_amplitude != 0.0) {
      onsite += spec.aa_amplitude *
                std::cos(2.0 * std::numbers::pi * spec.aa_frequency * site / static_cast<double>(n));
    }
    if (include_trap) {
      const double d = site - ic;
      onsite += spec.trap_amplitude * d * d;
    }
    h(site - 1, site - 1) = onsite;
  }
  return h;
}

RealMatrix reflection_matrix(int n_sites) {
  if (n_sites < 1) throw InvalidArgument("reflection_matrix: n_sites must be positive");
  RealMatrix r = RealMatrix::Zero(n_sites, n_sites);
  for (int i = 0; i < n_sites; ++i) r(n_sites - 1 - i, i) = 1.0;
  return r;
}

namespace {

void fix_sign(Eigen::Ref<RealVector> v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) > 1e-12) {
      if (v[k] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

std::pair<RealVector, RealMatrix> single_particle_modes(const RealMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw SolverBreakdown("single-particle eigensolve failed");
  RealMatrix modes = eig.eigenvectors();
  for (Eigen::Index k = 0; k < modes.cols(); ++k) fix_sign(modes.col(k));
  return {eig.eigenvalues(), modes};
}

ModeParity classify_mode_parity(const RealMatrix& h, const RealMatrix& reflection, double tolerance) {
  if (h.rows() != h.cols() || reflection.rows() != h.rows() || reflection.cols() != h.cols()) {
    throw DimensionMismatch("classify_mode_parity: h and reflection must be square and equal-sized");
  }
  const double commutator = (h * reflection - reflection * h).cwiseAbs().maxCoeff();
  if (commutator > tolerance * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw SymmetryBroken("parity classification unavailable: ||[h, R]|| = " +
                         std::to_string(commutator));
  }

  // Diagonalize h inside each reflection eigenspace separately. Near-degenerate doublets of
  // opposite parity (strong traps) would otherwise mix under round-off.
  const Eigen::Index n = h.rows();
  Eigen::SelfAdjointEigenSolver<RealMatrix> r_eig(0.5 * (reflection + reflection.transpose()));
  if (r_eig.info() != Eigen::Success) throw SolverBreakdown("reflection eigensolve failed");
  struct Mode {
    double energy;
    int parity;
    RealVector vector;
  };
  std::vector<Mode> all;
  for (int parity : {-1, +1}) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double lambda = r_eig.eigenvalues()[k];
      if (std::abs(lambda - parity) < 1e-8) {
        cols.push_back(k);
      } else if (std::abs(lambda + parity) > 1e-8) {
        throw InvalidArgument("classify_mode_parity: reflection is not an involution");
      }
    }
    if (cols.empty()) continue;
    RealMatrix q(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) q.col(static_cast<Eigen::Index>(c)) = r_eig.eigenvectors().col(cols[c]);
    Eigen::SelfAdjointEigenSolver<RealMatrix> sub(q.transpose() * h * q);
    if (sub.info() != Eigen::Success) throw SolverBreakdown("single-particle eigensolve failed");
    for (Eigen::Index k = 0; k < q.cols(); ++k) {
      RealVector v = q * sub.eigenvectors().col(k);
      fix_sign(v);
      all.push_back({sub.eigenvalues()[k], parity, std::move(v)});
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Mode& a, const Mode& b) { return a.energy < b.energy; });

  ModeParity out;
  out.energies.resize(n);
  out.modes.resize(n, n);
  out.parity.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Mode& m = all[static_cast<std::size_t>(k)];
    out.energies[k] = m.energy;
    out.modes.col(k) = m.vector;
    out.parity[static_cast<std::size_t>(k)] = m.parity;
    (m.parity > 0 ? out.even : out.odd).push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace dephasing
