#pragma once

#include <cstddef>

namespace isi {

/// Every numerical threshold used by the library, in one place.
///
/// Relative tolerances (suffix `_rel`) are multiplied by the operator norm
/// of the Hamiltonian they are applied to.
struct Tolerances {
  double state_norm = 1e-12;          ///< |‖ψ‖ − 1| for pure states
  double hermitian = 1e-12;           ///< max |ρ − ρ†| for density matrices
  double trace = 1e-12;               ///< |tr ρ − 1|
  double psd = -1e-10;                ///< lowest admissible eigenvalue
  double bloch_length = 1e-10;        ///< |p| ≤ 1 + bloch_length
  double orthonormal = 1e-10;         ///< max |B†B − I| for subspace bases
  double input_hermitian = 1e-10;     ///< asymmetry accepted on Hamiltonian parts
  double spectrum_rel = 1e-10;        ///< level-spacing degeneracy threshold
  double gaps_rel = 1e-9;             ///< Bohr-frequency collision threshold
  double eth_beta_tol = 1e-8;         ///< golden-section bracket width
  double eth_beta_max_scale = 50.0;   ///< β search range is ±scale/‖H_S‖
  double sufficient_threshold = 0.1;  ///< √δ smallness threshold

  std::size_t gap_check_max_dim = 4096;
  std::size_t decomposition_max_dim = 8192;
  std::size_t pair_cache_max_dim = 512;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace isi
