#pragma once

// Composite Hamiltonian assembly, dense Hermitian eigendecomposition and
// degeneracy diagnostics for spectra and Bohr frequencies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/tolerances.hpp"

namespace isi {

/// H = HS ⊗ 1 + 1 ⊗ HB + HSB on the shared layout.
struct CompositeHamiltonian {
  SpaceLayout layout;
  CMatrix HS;
  CMatrix HB;
  CMatrix HSB;
  CMatrix H;
};

namespace detail {
inline void require_hermitian(const CMatrix& m, const char* name, double tol) {
  if (m.rows() != m.cols()) throw DimensionError(std::string(name) + " is not square");
  const double dev = max_hermitian_deviation(m);
  if (dev > tol)
    throw InvalidArgumentError(std::string(name) + " is not Hermitian (max asymmetry " + std::to_string(dev) + ")");
}
}  // namespace detail

inline CompositeHamiltonian assemble(const CMatrix& HS, const CMatrix& HB, const CMatrix& HSB,
                                     const SpaceLayout& layout, const Tolerances& tol = default_tolerances()) {
  detail::require_hermitian(HS, "H_S", tol.input_hermitian);
  detail::require_hermitian(HB, "H_B", tol.input_hermitian);
  detail::require_hermitian(HSB, "H_SB", tol.input_hermitian);
  if (HS.rows() != layout.dS()) throw DimensionError("H_S dimension does not match layout");
  if (HB.rows() != layout.dB()) throw DimensionError("H_B dimension does not match layout");
  if (HSB.rows() != layout.d()) throw DimensionError("H_SB dimension does not match layout");
  if (static_cast<std::size_t>(layout.d()) > tol.decomposition_max_dim)
    throw CapExceededError("composite dimension " + std::to_string(layout.d()) + " exceeds decomposition cap " +
                           std::to_string(tol.decomposition_max_dim));
  // symmetrize away round-off so downstream Hermiticity checks are exact
  const CMatrix hs = 0.5 * (HS + HS.adjoint());
  const CMatrix hb = 0.5 * (HB + HB.adjoint());
  const CMatrix hsb = 0.5 * (HSB + HSB.adjoint());
  CMatrix H = kron(hs, CMatrix::Identity(layout.dB(), layout.dB())) +
              kron(CMatrix::Identity(layout.dS(), layout.dS()), hb) + hsb;
  return {layout, hs, hb, hsb, std::move(H)};
}

/// Ascending eigenvalues and phase-fixed orthonormal eigenvectors (columns).
struct SpectralData {
  RVector eigenvalues;
  CMatrix eigenvectors;
  double norm = 0.0;  ///< operator norm max |E_n|
  double min_level_spacing = std::numeric_limits<double>::infinity();
  long spacing_level = -1;  ///< n with E_{n+1} − E_n minimal
  std::optional<double> min_gap_collision;

  long dim() const noexcept { return eigenvalues.size(); }
};

namespace detail {

inline void fix_phases(CMatrix& vecs) {
  for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
      const double a = std::abs(vecs(i, k));
      // strict improvement beyond round-off keeps the choice stable under reordering noise
      if (a > best + 1e-12) {
        best = a;
        arg = i;
      }
    }
    if (best > 0.0) vecs.col(k) *= std::conj(vecs(arg, k)) / std::abs(vecs(arg, k));
    vecs(arg, k) = cplx(vecs(arg, k).real(), 0.0);
  }
}

inline void fill_spacing(SpectralData& s) {
  s.norm = s.eigenvalues.size() ? s.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  s.min_level_spacing = std::numeric_limits<double>::infinity();
  s.spacing_level = -1;
  for (Eigen::Index n = 0; n + 1 < s.eigenvalues.size(); ++n) {
    const double gap = s.eigenvalues(n + 1) - s.eigenvalues(n);
    if (gap < s.min_level_spacing) {
      s.min_level_spacing = gap;
      s.spacing_level = n;
    }
  }
}

}  // namespace detail

/// Builds SpectralData from unsorted eigenpairs: sorts ascending, fixes phases.
inline SpectralData make_spectral_data(const RVector& values, const CMatrix& vectors) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values(a) < values(b); });
  SpectralData s;
  s.eigenvalues.resize(values.size());
  s.eigenvectors.resize(vectors.rows(), vectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    s.eigenvalues(k) = values(order[k]);
    s.eigenvectors.col(k) = vectors.col(order[k]);
  }
  detail::fix_phases(s.eigenvectors);
  detail::fill_spacing(s);
  return s;
}

inline SpectralData eigendecompose(const CMatrix& H, const Tolerances& tol = default_tolerances()) {
  if (H.rows() != H.cols()) throw DimensionError("eigendecompose: matrix not square");
  if (static_cast<std::size_t>(H.rows()) > tol.decomposition_max_dim)
    throw CapExceededError("eigendecompose: dimension " + std::to_string(H.rows()) + " exceeds cap " +
                           std::to_string(tol.decomposition_max_dim));
  detail::require_hermitian(H, "H", tol.input_hermitian);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(H);
  if (solver.info() != Eigen::Success) throw ConvergenceError("Hermitian eigensolver did not converge");
  // Eigen already returns ascending order
  SpectralData s;
  s.eigenvalues = solver.eigenvalues();
  s.eigenvectors = solver.eigenvectors();
  detail::fix_phases(s.eigenvectors);
  detail::fill_spacing(s);
  return s;
}

inline SpectralData eigendecompose(const CompositeHamiltonian& h, const Tolerances& tol = default_tolerances()) {
  return eigendecompose(h.H, tol);
}

/// Residual and unitarity diagnostics of a decomposition against H.
struct SpectralResiduals {
  double max_residual = 0.0;       ///< max_n ‖H v_n − E_n v_n‖
  double unitarity = 0.0;          ///< max |V†V − 1|
  double reconstruction = 0.0;     ///< max |V diag(E) V† − H|
};

inline SpectralResiduals spectral_residuals(const SpectralData& s, const CMatrix& H) {
  SpectralResiduals r;
  const CMatrix& V = s.eigenvectors;
  const CMatrix HV = H * V;
  for (Eigen::Index n = 0; n < V.cols(); ++n)
    r.max_residual = std::max(r.max_residual, (HV.col(n) - s.eigenvalues(n) * V.col(n)).norm());
  r.unitarity = (V.adjoint() * V - CMatrix::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff();
  r.reconstruction = (V * s.eigenvalues.cast<cplx>().asDiagonal() * V.adjoint() - H).cwiseAbs().maxCoeff();
  return r;
}

struct SpectrumCheck {
  bool nondegenerate = false;
  double min_level_spacing = 0.0;
  long level = -1;  ///< lower index of the closest pair
};

inline SpectrumCheck check_nondegenerate_spectrum(const SpectralData& s, double tol_rel) {
  SpectrumCheck c;
  c.min_level_spacing = s.min_level_spacing;
  c.level = s.spacing_level;
  c.nondegenerate = s.dim() < 2 || s.min_level_spacing > tol_rel * s.norm;
  return c;
}

struct GapCheck {
  bool nondegenerate = false;
  /// Smallest distance between two distinct positive Bohr frequencies.
  double min_gap_collision = std::numeric_limits<double>::infinity();
  /// Smallest level spacing (the zero-gap case).
  double min_level_spacing = std::numeric_limits<double>::infinity();
  std::size_t n_gaps = 0;
};

/// All Bohr frequencies E_k − E_l (k > l) must be pairwise distinct.
///
/// Sorts the d(d−1)/2 gaps and scans neighbours; memory O(d²).
inline GapCheck check_nondegenerate_gaps(SpectralData& s, double tol_rel, std::size_t max_dim) {
  const auto d = static_cast<std::size_t>(s.dim());
  if (d > max_dim)
    throw CapExceededError("gap check: dimension " + std::to_string(d) + " exceeds cap " + std::to_string(max_dim));
  std::vector<double> gaps;
  gaps.reserve(d * (d - 1) / 2);
  for (std::size_t k = 1; k < d; ++k)
    for (std::size_t l = 0; l < k; ++l) gaps.push_back(s.eigenvalues(k) - s.eigenvalues(l));
  std::sort(gaps.begin(), gaps.end());
  GapCheck c;
  c.n_gaps = gaps.size();
  for (std::size_t i = 1; i < gaps.size(); ++i) c.min_gap_collision = std::min(c.min_gap_collision, gaps[i] - gaps[i - 1]);
  c.min_level_spacing = s.min_level_spacing;
  const double thr = tol_rel * s.norm;
  c.nondegenerate = c.min_gap_collision > thr && (d < 2 || c.min_level_spacing > thr);
  s.min_gap_collision = c.min_gap_collision;
  return c;
}

inline GapCheck check_nondegenerate_gaps(SpectralData& s, const Tolerances& tol = default_tolerances()) {
  return check_nondegenerate_gaps(s, tol.gaps_rel, tol.gap_check_max_dim);
}

}  // namespace isi
