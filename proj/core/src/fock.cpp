#include "dephasing/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "dephasing/errors.hpp"

namespace dephasing {

namespace {

constexpr Occupation bit(int site) { return Occupation{1} << (site - 1); }

bool occupied(Occupation s, int site) { return (s & bit(site)) != 0; }

/// Number of occupied sites strictly below `site`.
int occupied_below(Occupation s, int site) { return std::popcount(s & (bit(site) - 1)); }

void check_site(const ManyBodyBasis& basis, int site) {
  if (site < 1 || site > basis.n_sites()) {
    throw InvalidArgument("site " + std::to_string(site) + " outside 1.." +
                          std::to_string(basis.n_sites()));
  }
}

/// f_i^dag f_j |s>, or nullopt when it vanishes.
std::optional<std::pair<Occupation, double>> hop(Occupation s, int i, int j) {
  if (!occupied(s, j)) return std::nullopt;
  double sign = (occupied_below(s, j) % 2 == 0) ? 1.0 : -1.0;
  s &= ~bit(j);
  if (occupied(s, i)) return std::nullopt;
  if (occupied_below(s, i) % 2 != 0) sign = -sign;
  s |= bit(i);
  return std::make_pair(s, sign);
}

}  // namespace

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t result = 1;
  for (int m = 1; m <= k; ++m) result = result * static_cast<std::size_t>(n - k + m) / m;
  return result;
}

ManyBodyBasis::ManyBodyBasis(int n_sites, int n_particles)
    : n_sites_(n_sites), n_particles_(n_particles) {
  if (n_sites < 1 || n_sites > 62) throw InvalidArgument("n_sites must lie in 1..62");
  if (n_particles < 0 || n_particles > n_sites) {
    throw InvalidArgument("particle number " + std::to_string(n_particles) + " outside 0.." +
                          std::to_string(n_sites));
  }
  states_.reserve(binomial(n_sites, n_particles));
  if (n_particles == 0) {
    states_.push_back(0);
    return;
  }
  // Gosper's hack walks fixed-popcount masks in ascending order.
  Occupation s = (Occupation{1} << n_particles) - 1;
  const Occupation limit = Occupation{1} << n_sites;
  while (s < limit) {
    states_.push_back(s);
    const Occupation low = s & (~s + 1);
    const Occupation ripple = s + low;
    s = (((ripple ^ s) >> 2) / low) | ripple;
  }
}

std::optional<std::size_t> ManyBodyBasis::index_of(Occupation occupation) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), occupation);
  if (it == states_.end() || *it != occupation) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

Occupation ManyBodyBasis::parse(std::string_view bitstring) {
  if (bitstring.empty() || bitstring.size() > 62) throw InvalidArgument("bad bitstring length");
  Occupation s = 0;
  for (std::size_t k = 0; k < bitstring.size(); ++k) {
    if (bitstring[k] == '1') {
      s |= bit(static_cast<int>(k) + 1);
    } else if (bitstring[k] != '0') {
      throw InvalidArgument("bitstring may only contain '0' and '1': " + std::string(bitstring));
    }
  }
  return s;
}

std::string ManyBodyBasis::format(Occupation occupation, int n_sites) {
  std::string out(static_cast<std::size_t>(n_sites), '0');
  for (int site = 1; site <= n_sites; ++site) {
    if (occupied(occupation, site)) out[static_cast<std::size_t>(site - 1)] = '1';
  }
  return out;
}

ManyBodyBasis enumerate_basis(int n_sites, int n_particles) {
  return ManyBodyBasis(n_sites, n_particles);
}

OperatorMatrix bilinear_operator(const ManyBodyBasis& basis, int i, int j) {
  check_site(basis, i);
  check_site(basis, j);
  std::vector<OperatorMatrix::Triplet> triplets;
  triplets.reserve(basis.size());
  for (std::size_t col = 0; col < basis.size(); ++col) {
    if (const auto image = hop(basis.state(col), i, j)) {
      const auto row = basis.index_of(image->first);
      triplets.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col),
                            image->second);
    }
  }
  return OperatorMatrix::from_triplets(basis.dimension(), triplets);
}

OperatorMatrix number_operator(const ManyBodyBasis& basis, int site) {
  return bilinear_operator(basis, site, site);
}

OperatorMatrix total_number_operator(const ManyBodyBasis& basis) {
  return Complex(basis.n_particles()) * OperatorMatrix::identity(basis.dimension());
}

OperatorMatrix build_many_body_hamiltonian(const LatticeSpec& spec, const ManyBodyBasis& basis,
                                           bool include_trap) {
  if (spec.n_sites != basis.n_sites()) {
    throw DimensionMismatch("hamiltonian: spec has " + std::to_string(spec.n_sites) +
                            " sites, basis has " + std::to_string(basis.n_sites()));
  }
  const RealMatrix h = build_single_particle_hamiltonian(spec, include_trap);
  const int n = spec.n_sites;
  std::vector<OperatorMatrix::Triplet> triplets;
  for (std::size_t col = 0; col < basis.size(); ++col) {
    const Occupation s = basis.state(col);
    double diagonal = 0.0;
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j <= n; ++j) {
        const double hij = h(i - 1, j - 1);
        if (hij == 0.0) continue;
        if (i == j) {
          if (occupied(s, i)) diagonal += hij;
          continue;
        }
        if (const auto image = hop(s, i, j)) {
          const auto row = basis.index_of(image->first);
          triplets.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col),
                                hij * image->second);
        }
      }
    }
    for (int i = 1; i < n; ++i) {
      if (occupied(s, i) && occupied(s, i + 1)) diagonal += spec.interaction;
    }
    if (diagonal != 0.0) {
      triplets.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(col), diagonal);
    }
  }
  return OperatorMatrix::from_triplets(basis.dimension(), triplets);
}

OperatorMatrix reflection_operator(const ManyBodyBasis& basis) {
  const int n = basis.n_sites();
  std::vector<OperatorMatrix::Triplet> triplets;
  triplets.reserve(basis.size());
  std::vector<int> reflected;
  for (std::size_t col = 0; col < basis.size(); ++col) {
    const Occupation s = basis.state(col);
    reflected.clear();
    for (int site = 1; site <= n; ++site) {
      if (occupied(s, site)) reflected.push_back(n + 1 - site);
    }
    // Bubble the reflected creation string back into ascending order, one swap per sign flip.
    int swaps = 0;
    for (std::size_t a = 0; a < reflected.size(); ++a) {
      for (std::size_t b = 0; b + 1 < reflected.size() - a; ++b) {
        if (reflected[b] > reflected[b + 1]) {
          std::swap(reflected[b], reflected[b + 1]);
          ++swaps;
        }
      }
    }
    Occupation image = 0;
    for (int site : reflected) image |= bit(site);
    const auto row = basis.index_of(image);
    triplets.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col),
                          swaps % 2 == 0 ? 1.0 : -1.0);
  }
  return OperatorMatrix::from_triplets(basis.dimension(), triplets);
}

OperatorMatrix charge_operator(const ManyBodyBasis& basis) {
  const int n = basis.n_sites();
  OperatorMatrix c = Complex(-0.5) * OperatorMatrix::identity(basis.dimension());
  for (int i = 1; i <= n; ++i) c = c + bilinear_operator(basis, i, n + 1 - i);
  return c;
}

std::vector<ChargeSector> enumerate_charge_sectors(int n_sites, int n_particles) {
  if (n_sites < 1 || n_sites % 2 == 0) throw InvalidArgument("n_sites must be odd and positive");
  if (n_particles < 0 || n_particles > n_sites) throw InvalidArgument("particle number out of range");
  const int even_modes = (n_sites + 1) / 2;
  const int odd_modes = (n_sites - 1) / 2;
  std::vector<ChargeSector> sectors;
  for (int nu_even = 0; nu_even <= even_modes; ++nu_even) {
    const int nu_odd = n_particles - nu_even;
    if (nu_odd < 0 || nu_odd > odd_modes) continue;
    sectors.push_back({-0.5 + nu_even - nu_odd, nu_even, nu_odd,
                       binomial(even_modes, nu_even) * binomial(odd_modes, nu_odd)});
  }
  std::sort(sectors.begin(), sectors.end(),
            [](const ChargeSector& a, const ChargeSector& b) { return a.eigenvalue < b.eigenvalue; });
  return sectors;
}

ComplexVector slater_state(const ManyBodyBasis& basis, const RealMatrix& modes,
                           std::span<const int> mode_indices) {
  if (modes.rows() != basis.n_sites()) throw DimensionMismatch("slater_state: mode length != n_sites");
  if (static_cast<int>(mode_indices.size()) != basis.n_particles()) {
    throw InvalidArgument("slater_state: need exactly " + std::to_string(basis.n_particles()) +
                          " mode indices");
  }
  std::vector<int> sorted(mode_indices.begin(), mode_indices.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("slater_state: repeated mode index");
  }
  for (int m : sorted) {
    if (m < 0 || m >= modes.cols()) throw InvalidArgument("slater_state: mode index out of range");
  }

  const int k = basis.n_particles();
  ComplexVector psi(basis.dimension());
  RealMatrix minor(k, k);
  for (std::size_t idx = 0; idx < basis.size(); ++idx) {
    const Occupation s = basis.state(idx);
    int row = 0;
    for (int site = 1; site <= basis.n_sites(); ++site) {
      if (!occupied(s, site)) continue;
      for (int a = 0; a < k; ++a) minor(row, a) = modes(site - 1, mode_indices[static_cast<std::size_t>(a)]);
      ++row;
    }
    psi[static_cast<Eigen::Index>(idx)] = k == 0 ? 1.0 : minor.determinant();
  }
  const double norm = psi.norm();
  if (norm < 1e-12) throw InvalidArgument("slater_state: modes are linearly dependent");
  return psi / norm;
}

ComplexVector fock_state(const ManyBodyBasis& basis, std::string_view bitstring) {
  if (static_cast<int>(bitstring.size()) != basis.n_sites()) {
    throw InvalidArgument("fock_state: bitstring length " + std::to_string(bitstring.size()) +
                          " != n_sites " + std::to_string(basis.n_sites()));
  }
  const Occupation s = ManyBodyBasis::parse(bitstring);
  if (std::popcount(s) != basis.n_particles()) {
    throw InvalidArgument("fock_state: popcount of " + std::string(bitstring) + " != " +
                          std::to_string(basis.n_particles()));
  }
  ComplexVector psi = ComplexVector::Zero(basis.dimension());
  psi[static_cast<Eigen::Index>(*basis.index_of(s))] = 1.0;
  return psi;
}

ChargeProjectors::ChargeProjectors(const ManyBodyBasis& basis) {
  const ComplexMatrix c = charge_operator(basis).dense();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(c);
  if (eig.info() != Eigen::Success) throw SolverBreakdown("charge operator eigensolve failed");
  const auto& values = eig.eigenvalues();
  const auto& vectors = eig.eigenvectors();
  for (Eigen::Index k = 0; k < values.size();) {
    const double lambda = std::round(values[k] - 0.5) + 0.5;
    if (std::abs(values[k] - lambda) > 1e-9) {
      throw SolverBreakdown("charge eigenvalue " + std::to_string(values[k]) + " is not a half-integer");
    }
    Eigen::Index stop = k;
    while (stop < values.size() && std::abs(values[stop] - lambda) < 1e-9) ++stop;
    const auto block = vectors.middleCols(k, stop - k);
    eigenvalues_.push_back(lambda);
    projectors_.push_back(block * block.adjoint());
    k = stop;
  }
}

std::vector<double> ChargeProjectors::populations(const ComplexMatrix& rho) const {
  std::vector<double> out;
  out.reserve(projectors_.size());
  for (const auto& p : projectors_) out.push_back((p * rho).trace().real());
  return out;
}

std::optional<double> ChargeProjectors::sector_of(const ComplexVector& psi, double tolerance) const {
  const double total = psi.squaredNorm();
  for (std::size_t k = 0; k < projectors_.size(); ++k) {
    const double weight = (projectors_[k] * psi).squaredNorm();
    if (total - weight < tolerance * std::max(1.0, total)) return eigenvalues_[k];
  }
  return std::nullopt;
}

std::pair<ComplexMatrix, ComplexMatrix> parity_projectors(const ManyBodyBasis& basis) {
  const ComplexMatrix r = reflection_operator(basis).dense();
  const ComplexMatrix id = ComplexMatrix::Identity(r.rows(), r.cols());
  return {0.5 * (id + r), 0.5 * (id - r)};
}

}  // namespace dephasing
