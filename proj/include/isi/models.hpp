#pragma once

// Benchmark Hamiltonians: the commuting spin–bath model with its closed-form
// eigensystem, the noninteracting-spin dephasing bath, and a Gaussian
// Hermitian ensemble used for contrast.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/sampling.hpp"
#include "isi/spectral.hpp"

namespace isi {

/// H = (ω/2)σ_z + ½ Σ_α σ_α ⊗ V_α + H_B with V_α, H_B diagonal in the bath basis.
struct CommutingModelSpec {
  double omega = 1.0;
  Eigen::MatrixX3d v;  ///< row l = (v_lx, v_ly, v_lz)
  RVector EB;          ///< bath energies E_l^B

  long dB() const noexcept { return v.rows(); }

  void validate() const {
    if (v.rows() < 1) throw DimensionError("commuting model needs at least one bath level");
    if (EB.size() != v.rows()) throw DimensionError("commuting model: EB length differs from number of v rows");
    if (!v.allFinite() || !EB.allFinite() || !std::isfinite(omega))
      throw InvalidArgumentError("commuting model: non-finite parameters");
    if (v.col(0).cwiseAbs().maxCoeff() == 0.0 && v.col(1).cwiseAbs().maxCoeff() == 0.0)
      throw InvalidArgumentError("commuting model: at least one of V_x, V_y must be nonzero");
  }
};

inline CompositeHamiltonian build_commuting_model(const CommutingModelSpec& spec,
                                                  const Tolerances& tol = default_tolerances()) {
  spec.validate();
  const long dB = spec.dB();
  const SpaceLayout layout(2, dB);
  const auto sigma = pauli_matrices();
  CMatrix HS = 0.5 * spec.omega * sigma[2];
  CMatrix HB = spec.EB.cast<cplx>().asDiagonal();
  CMatrix HSB = CMatrix::Zero(2 * dB, 2 * dB);
  for (int a = 0; a < 3; ++a) {
    const CMatrix Va = spec.v.col(a).cast<cplx>().asDiagonal();
    HSB += 0.5 * kron(sigma[a], Va);
  }
  return assemble(HS, HB, HSB, layout, tol);
}

/// Bath operators V_x, V_y, V_z, H_B as dense matrices (for commutator checks).
inline std::array<CMatrix, 4> commuting_model_bath_operators(const CommutingModelSpec& spec) {
  std::array<CMatrix, 4> ops;
  for (int a = 0; a < 3; ++a) ops[a] = spec.v.col(a).cast<cplx>().asDiagonal();
  ops[3] = spec.EB.cast<cplx>().asDiagonal();
  return ops;
}

/// Closed-form eigenpairs Ψ_{l±} = ψ_{l±} ⊗ Φ_l,
/// E_{l±} = E_l^B ± ½ √((ω + v_lz)² + v_lx² + v_ly²).
inline SpectralData analytic_eigensystem(const CommutingModelSpec& spec) {
  spec.validate();
  const long dB = spec.dB();
  const long d = 2 * dB;
  const auto sigma = pauli_matrices();
  RVector values(d);
  CMatrix vectors = CMatrix::Zero(d, d);
  for (long l = 0; l < dB; ++l) {
    const double bx = spec.v(l, 0), by = spec.v(l, 1), bz = spec.omega + spec.v(l, 2);
    const double r = std::sqrt(bx * bx + by * by + bz * bz);
    Eigen::Matrix2cd h = bx * sigma[0] + by * sigma[1] + bz * sigma[2];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    for (int s = 0; s < 2; ++s) {
      const long col = 2 * l + s;
      // es sorts ascending: s = 0 is the (−) branch
      values(col) = spec.EB(l) + (s == 0 ? -0.5 : 0.5) * r;
      vectors(0 * dB + l, col) = es.eigenvectors()(0, s);
      vectors(1 * dB + l, col) = es.eigenvectors()(1, s);
    }
  }
  return make_spectral_data(values, vectors);
}

/// Noninteracting bath spins with V_x = Σ_k g_k σ_z^(k), H_B = Σ_k ε_k σ_z^(k),
/// V_y = V_z = 0. Spin k = 0 is the most significant bit of the bath index l,
/// with s_k(l) = +1 for bit 0 and −1 for bit 1.
inline CommutingModelSpec build_cucchietti_bath(int n_spins, const std::vector<double>& g,
                                                const std::vector<double>& eps, double omega,
                                                long max_dim = 8192) {
  if (n_spins < 1) throw InvalidArgumentError("cucchietti bath needs at least one spin");
  if (static_cast<int>(g.size()) != n_spins || static_cast<int>(eps.size()) != n_spins)
    throw DimensionError("cucchietti bath: coupling and field vectors must have n_spins entries");
  if (n_spins > 30 || 2L * (1L << n_spins) > max_dim)
    throw CapExceededError("cucchietti bath: 2^" + std::to_string(n_spins) + " bath levels exceed the dense cap");
  const long dB = 1L << n_spins;
  CommutingModelSpec spec;
  spec.omega = omega;
  spec.v = Eigen::MatrixX3d::Zero(dB, 3);
  spec.EB = RVector::Zero(dB);
  for (long l = 0; l < dB; ++l)
    for (int k = 0; k < n_spins; ++k) {
      const double s = ((l >> (n_spins - 1 - k)) & 1L) ? -1.0 : 1.0;
      spec.v(l, 0) += g[k] * s;
      spec.EB(l) += eps[k] * s;
    }
  return spec;
}

/// Random commuting-model spec with v_lα and E_l^B uniform on [−scale, scale].
inline CommutingModelSpec random_commuting_spec(long dB, double omega, double v_scale, double eb_scale,
                                                RngStream& rng) {
  CommutingModelSpec spec;
  spec.omega = omega;
  spec.v.resize(dB, 3);
  spec.EB.resize(dB);
  for (long l = 0; l < dB; ++l) {
    for (int a = 0; a < 3; ++a) spec.v(l, a) = v_scale * (2.0 * rng.uniform() - 1.0);
    spec.EB(l) = eb_scale * (2.0 * rng.uniform() - 1.0);
  }
  return spec;
}

/// Hermitian matrix with complex Gaussian off-diagonal entries of variance
/// `variance` and real diagonal entries of the same variance.
inline CMatrix gaussian_hermitian(long n, double variance, RngStream& rng) {
  const double s_off = std::sqrt(variance / 2.0);
  const double s_diag = std::sqrt(variance);
  CMatrix m(n, n);
  for (long i = 0; i < n; ++i) {
    m(i, i) = s_diag * rng.normal();
    for (long j = i + 1; j < n; ++j) {
      const double re = rng.normal(), im = rng.normal();
      m(i, j) = s_off * cplx(re, im);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

/// H_S, H_B and H_SB from the Gaussian Hermitian ensemble with variance 1/n
/// per n×n part (‖H‖ = O(1) at every size); H_SB scaled by `strength`.
inline CompositeHamiltonian build_random_model(long dS, long dB, double strength, RngStream& rng,
                                               const Tolerances& tol = default_tolerances()) {
  const SpaceLayout layout(dS, dB);
  if (static_cast<std::size_t>(layout.d()) > tol.decomposition_max_dim)
    throw CapExceededError("random model: composite dimension " + std::to_string(layout.d()) + " exceeds cap");
  CMatrix HS = gaussian_hermitian(dS, 1.0 / dS, rng);
  CMatrix HB = gaussian_hermitian(dB, 1.0 / dB, rng);
  CMatrix HSB = strength * gaussian_hermitian(layout.d(), 1.0 / layout.d(), rng);
  return assemble(HS, HB, HSB, layout, tol);
}

inline double commutator_norm(const CMatrix& a, const CMatrix& b) {
  return (a * b - b * a).cwiseAbs().maxCoeff();
}

}  // namespace isi
