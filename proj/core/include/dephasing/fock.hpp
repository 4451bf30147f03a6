#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dephasing/model.hpp"
#include "dephasing/operator_matrix.hpp"
#include "dephasing/types.hpp"

namespace dephasing {

/// Occupation pattern of a Fock state: bit (i - 1) is set iff site i is occupied.
using Occupation = std::uint64_t;

/// All Fock states of a fixed particle number on an open chain.
///
/// A basis state |S> with occupied sites s_1 < s_2 < ... < s_k stands for
/// f_{s_1}^dag f_{s_2}^dag ... f_{s_k}^dag |0>. Every fermionic sign in the library derives from
/// this ascending creation order. States are stored in ascending order of the occupation mask,
/// so for one particle on three sites the order is 100, 010, 001 (site 1 written leftmost).
class ManyBodyBasis {
 public:
  ManyBodyBasis(int n_sites, int n_particles);

  int n_sites() const noexcept { return n_sites_; }
  int n_particles() const noexcept { return n_particles_; }
  std::size_t size() const noexcept { return states_.size(); }
  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(states_.size()); }

  Occupation state(std::size_t index) const { return states_.at(index); }
  std::span<const Occupation> states() const noexcept { return states_; }
  std::optional<std::size_t> index_of(Occupation occupation) const;

  /// "0101" style string, site 1 leftmost.
  std::string label(std::size_t index) const { return format(states_.at(index), n_sites_); }

  static Occupation parse(std::string_view bitstring);
  static std::string format(Occupation occupation, int n_sites);

  friend bool operator==(const ManyBodyBasis& a, const ManyBodyBasis& b) {
    return a.n_sites_ == b.n_sites_ && a.n_particles_ == b.n_particles_;
  }

 private:
  int n_sites_;
  int n_particles_;
  std::vector<Occupation> states_;
};

ManyBodyBasis enumerate_basis(int n_sites, int n_particles);

/// Matrix of f_i^dag f_j (1-based sites) including the fermionic string sign.
OperatorMatrix bilinear_operator(const ManyBodyBasis& basis, int i, int j);
/// n_i = f_i^dag f_i.
OperatorMatrix number_operator(const ManyBodyBasis& basis, int site);
OperatorMatrix total_number_operator(const ManyBodyBasis& basis);

/// sum_ij h_ij f_i^dag f_j + V_int sum_i n_i n_{i+1}.
OperatorMatrix build_many_body_hamiltonian(const LatticeSpec& spec, const ManyBodyBasis& basis,
                                           bool include_trap = false);

/// Site reversal R f_i R = f_{N+1-i}; the sign of each image is the parity of reordering the
/// reflected creation string back into ascending order.
OperatorMatrix reflection_operator(const ManyBodyBasis& basis);

/// Hidden charge C = -1/2 + sum_i f_i^dag f_{N+1-i}.
OperatorMatrix charge_operator(const ManyBodyBasis& basis);

/// One eigenvalue lambda = -1/2 + nu_even - nu_odd of the hidden charge within a particle sector.
struct ChargeSector {
  double eigenvalue;
  int nu_even;
  int nu_odd;
  std::size_t degeneracy;
};

/// All (nu_even, nu_odd) splittings of n_particles; degeneracies sum to C(N, n_particles).
std::vector<ChargeSector> enumerate_charge_sectors(int n_sites, int n_particles);

std::size_t binomial(int n, int k);

/// Normalized Slater determinant of the given columns of `modes` (single-particle eigenmodes).
/// Throws InvalidArgument on repeated or out-of-range indices or a particle-number mismatch.
ComplexVector slater_state(const ManyBodyBasis& basis, const RealMatrix& modes,
                           std::span<const int> mode_indices);

/// Unit vector on the basis element matching a site-1-leftmost bitstring.
ComplexVector fock_state(const ManyBodyBasis& basis, std::string_view bitstring);

/// Spectral projectors of the hidden charge within one particle sector.
///
/// Membership of arbitrary states is decided by projection, never by mode bookkeeping.
class ChargeProjectors {
 public:
  explicit ChargeProjectors(const ManyBodyBasis& basis);

  /// Distinct eigenvalues, ascending.
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const ComplexMatrix& projector(std::size_t sector) const { return projectors_.at(sector); }

  /// Tr(P_lambda rho) for every sector, in eigenvalue order.
  std::vector<double> populations(const ComplexMatrix& rho) const;

  /// Eigenvalue of the sector holding psi, or nullopt if more than `tolerance` weight leaks out.
  std::optional<double> sector_of(const ComplexVector& psi, double tolerance = 1e-9) const;

 private:
  std::vector<double> eigenvalues_;
  std::vector<ComplexMatrix> projectors_;
};

/// Projectors (1 +- R) / 2 onto the two reflection-parity sectors.
std::pair<ComplexMatrix, ComplexMatrix> parity_projectors(const ManyBodyBasis& basis);

}  // namespace dephasing
