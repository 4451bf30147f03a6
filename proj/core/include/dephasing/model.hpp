#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dephasing/types.hpp"

namespace dephasing {

/// Inverse golden ratio, the default quasi-periodic frequency of the Aubry-Andre term.
inline const double kGoldenFrequency = (std::sqrt(5.0) - 1.0) / 2.0;

/// Open 1D spinless-fermion chain with dephasing on the central site only.
///
/// Sites are numbered 1..n_sites throughout the library. hbar = 1.
struct LatticeSpec {
  int n_sites = 3;
  double tunneling = 1.0;        // J
  double dephasing_gamma = 1.0;  // rate on the central site
  double aa_amplitude = 0.0;     // V_AA
  double aa_frequency = kGoldenFrequency;
  double trap_amplitude = 0.0;   // V of V * (i - i_c)^2
  std::optional<int> trap_center;  // defaults to the central site
  double interaction = 0.0;      // nearest-neighbour V_int n_i n_{i+1}

  /// Central site c = (N + 1) / 2.
  int center_site() const noexcept { return (n_sites + 1) / 2; }
  int resolved_trap_center() const noexcept { return trap_center.value_or(center_site()); }

  /// Throws InvalidArgument on even/zero N, J <= 0, or negative amplitudes.
  void validate() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Tridiagonal hopping -J plus on-site AA potential and, when requested, the harmonic trap.
/// The many-body interaction term is not part of this matrix.
RealMatrix build_single_particle_hamiltonian(const LatticeSpec& spec, bool include_trap = false);

/// Site-reversal permutation i -> N + 1 - i.
RealMatrix reflection_matrix(int n_sites);

/// Single-particle eigenmodes split by reflection parity.
struct ModeParity {
  RealVector energies;            // ascending
  RealMatrix modes;               // column k is the k-th eigenmode, first nonzero entry positive
  std::vector<int> even;          // column indices with R psi = +psi, ascending energy
  std::vector<int> odd;           // column indices with R psi = -psi
  std::vector<int> parity;        // +1 / -1 per column
};

/// Diagonalizes h and labels each eigenmode by reflection parity. Degenerate eigenspaces are
/// rotated onto reflection eigenvectors first. Throws SymmetryBroken when h does not commute
/// with the reflection.
ModeParity classify_mode_parity(const RealMatrix& h, const RealMatrix& reflection,
                                double tolerance = 1e-10);

/// Plain ascending eigen-decomposition without parity bookkeeping (usable with broken symmetry).
std::pair<RealVector, RealMatrix> single_particle_modes(const RealMatrix& h);

}  // namespace dephasing
