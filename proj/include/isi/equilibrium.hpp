#pragma once

// Eigenstate reductions ρ^S_n, overlaps c_n, infinite-time averages, δ,
// closed-form subspace averages and per-eigenstate Gibbs fits.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/sampling.hpp"
#include "isi/spectral.hpp"
#include "isi/tolerances.hpp"

namespace isi {

struct OverlapCoefficients {
  CVector c;

  long dim() const noexcept { return c.size(); }
  RVector weights() const { return c.cwiseAbs2(); }
};

/// c_n = ⟨Ψ_n|Ψ(0)⟩.
inline OverlapCoefficients overlaps(const SpectralData& spec, const PureState& psi0,
                                   const Tolerances& tol = default_tolerances()) {
  if (psi0.dim() != spec.dim()) throw DimensionError("overlaps: state dimension does not match spectrum");
  OverlapCoefficients out{spec.eigenvectors.adjoint() * psi0.amplitudes()};
  const double total = out.c.squaredNorm();
  if (std::abs(total - 1.0) > 10 * tol.state_norm)
    throw InvalidStateError("overlaps: sum |c_n|^2 = " + std::to_string(total));
  return out;
}

struct EigenstateReductions {
  SpaceLayout layout;
  RVector energies;
  std::vector<DensityMatrix> rho;   ///< ρ^S_n = tr_B |Ψ_n⟩⟨Ψ_n|
  std::vector<BlochVector> bloch;   ///< only filled when dS = 2
  RVector purity;
  bool nondegenerate = false;       ///< spectrum certified at construction
  double min_level_spacing = 0.0;
  long spacing_level = -1;

  long dim() const noexcept { return static_cast<long>(rho.size()); }
};

inline EigenstateReductions eigenstate_reductions(const SpectralData& spec, const SpaceLayout& layout,
                                                  const Tolerances& tol = default_tolerances()) {
  if (spec.dim() != layout.d()) throw DimensionError("eigenstate_reductions: spectrum dimension does not match layout");
  const long d = layout.d();
  const auto check = check_nondegenerate_spectrum(spec, tol.spectrum_rel);
  EigenstateReductions red{layout, spec.eigenvalues, {}, {}, RVector(d), check.nondegenerate,
                           check.min_level_spacing, check.level};
  red.rho.reserve(d);
  if (layout.dS() == 2) red.bloch.reserve(d);
  for (long n = 0; n < d; ++n) {
    const CVector v = spec.eigenvectors.col(n);
    CMatrix r = partial_trace_bath(v, v, layout);
    r = 0.5 * (r + r.adjoint());
    red.purity(n) = purity(r);
    if (layout.dS() == 2) red.bloch.push_back(bloch_vector(r));
    red.rho.emplace_back(std::move(r), Space::system, tol);
  }
  return red;
}

/// ρ^S_{nm} = tr_B |Ψ_n⟩⟨Ψ_m| (not a density matrix for n ≠ m).
inline CMatrix pair_reduction(const SpectralData& spec, const SpaceLayout& layout, long n, long m) {
  return partial_trace_bath(CVector(spec.eigenvectors.col(n)), CVector(spec.eigenvectors.col(m)), layout);
}

/// Σ_n w_n ρ^S_n without validation.
inline CMatrix weighted_reduction_sum(const RVector& w, const EigenstateReductions& red) {
  if (w.size() != red.dim()) throw DimensionError("weight vector does not match number of eigenstates");
  const long dS = red.layout.dS();
  CMatrix acc = CMatrix::Zero(dS, dS);
  for (long n = 0; n < red.dim(); ++n)
    if (w(n) != 0.0) acc += w(n) * red.rho[n].matrix();
  return acc;
}

inline DensityMatrix as_system_state(CMatrix m, const Tolerances& tol = default_tolerances()) {
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix(std::move(m), Space::system, tol);
}

namespace detail {
inline void require_nondegenerate(const EigenstateReductions& red, const char* who) {
  if (!red.nondegenerate)
    throw DegenerateSpectrumError(std::string(who) + ": spectrum is degenerate (levels " +
                                      std::to_string(red.spacing_level) + " and " +
                                      std::to_string(red.spacing_level + 1) + " are " +
                                      std::to_string(red.min_level_spacing) + " apart)",
                                  red.spacing_level, red.spacing_level + 1);
}
}  // namespace detail

/// ρ̄^S = Σ_n |c_n|² ρ^S_n; refuses a degenerate spectrum.
inline DensityMatrix time_averaged_state(const OverlapCoefficients& c, const EigenstateReductions& red,
                                         const Tolerances& tol = default_tolerances()) {
  detail::require_nondegenerate(red, "time_averaged_state");
  return as_system_state(weighted_reduction_sum(c.weights(), red), tol);
}

/// Exact infinite-time average when levels may coincide: coherences inside
/// each degenerate block survive the time average.
inline DensityMatrix time_averaged_state_degenerate(const OverlapCoefficients& c, const SpectralData& spec,
                                                   const SpaceLayout& layout,
                                                   const Tolerances& tol = default_tolerances()) {
  const long d = spec.dim();
  const double thr = tol.spectrum_rel * spec.norm;
  CMatrix acc = CMatrix::Zero(layout.dS(), layout.dS());
  long start = 0;
  while (start < d) {
    long end = start + 1;
    while (end < d && spec.eigenvalues(end) - spec.eigenvalues(end - 1) <= thr) ++end;
    const CVector block = spec.eigenvectors.middleCols(start, end - start) * c.c.segment(start, end - start);
    acc += partial_trace_bath(block, block, layout);
    start = end;
  }
  return as_system_state(std::move(acc), tol);
}

/// ⟨Ψ_n|Π_{H_R}|Ψ_n⟩ / d_R for every n; these are the H_R-averages of |c_n|².
inline RVector subspace_weights(const SubspaceBasis& subspace, const SpectralData& spec) {
  if (subspace.ambient_dim() != spec.dim() || subspace.space() != Space::composite)
    throw DimensionError("subspace must live in the composite space of the spectrum");
  if (subspace.dim() == subspace.ambient_dim()) return RVector::Constant(spec.dim(), 1.0 / spec.dim());
  const CMatrix proj = spec.eigenvectors.adjoint() * subspace.columns();
  return proj.rowwise().squaredNorm() / static_cast<double>(subspace.dim());
}

/// δ = Σ_n ⟨Ψ_n|Π_{H_R}|Ψ_n⟩/d_R · tr(ρ^S_n)².
inline double delta(const EigenstateReductions& red, const SubspaceBasis& subspace, const SpectralData& spec) {
  const RVector w = subspace_weights(subspace, spec);
  return w.dot(red.purity);
}

/// ⟨ρ̄^S⟩_{H_R}, exact by linearity of ρ̄^S in |Ψ⟩⟨Ψ|.
inline DensityMatrix subspace_average(const EigenstateReductions& red, const SubspaceBasis& subspace,
                                      const SpectralData& spec, const Tolerances& tol = default_tolerances()) {
  detail::require_nondegenerate(red, "subspace_average");
  return as_system_state(weighted_reduction_sum(subspace_weights(subspace, spec), red), tol);
}

/// (1/d_B) Σ_n ⟨ψ|ρ^S_n|ψ⟩ ρ^S_n without validation; its trace is 1 by completeness.
inline CMatrix bath_averaged_matrix(const PureState& psi, const EigenstateReductions& red) {
  if (psi.dim() != red.layout.dS()) throw DimensionError("bath average: ψ must live in the system space");
  const CVector& a = psi.amplitudes();
  RVector w(red.dim());
  for (long n = 0; n < red.dim(); ++n) w(n) = (a.adjoint() * red.rho[n].matrix() * a)(0, 0).real();
  return weighted_reduction_sum(w / static_cast<double>(red.layout.dB()), red);
}

/// ⟨ρ̄^S⟩_B[ψ] in closed form.
inline DensityMatrix bath_averaged_equilibrium(const PureState& psi, const EigenstateReductions& red,
                                               const Tolerances& tol = default_tolerances()) {
  detail::require_nondegenerate(red, "bath_averaged_equilibrium");
  return as_system_state(bath_averaged_matrix(psi, red), tol);
}

/// ⟨ρ̄^S⟩_{S⊗B} = 1/d_S.
inline DensityMatrix full_average(const SpaceLayout& layout) {
  return DensityMatrix::maximally_mixed(layout.dS(), Space::system);
}

/// (1/d) Σ_n ρ^S_n − 1/d_S, max abs entry. Zero for an orthonormal eigenbasis.
inline double completeness_deviation(const EigenstateReductions& red) {
  const long d = red.dim(), dS = red.layout.dS();
  const CMatrix avg = weighted_reduction_sum(RVector::Constant(d, 1.0 / d), red);
  return (avg - CMatrix::Identity(dS, dS) / static_cast<double>(dS)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Per-eigenstate Gibbs fit

/// Z⁻¹ exp(−β H_S) from a precomputed eigendecomposition of H_S.
class GibbsFamily {
public:
  explicit GibbsFamily(const CMatrix& HS) {
    if (HS.rows() != HS.cols()) throw DimensionError("GibbsFamily: H_S not square");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (HS + HS.adjoint()));
    energies_ = es.eigenvalues();
    basis_ = es.eigenvectors();
    norm_ = energies_.cwiseAbs().maxCoeff();
  }

  CMatrix state(double beta) const {
    // shift by the extremal level that dominates, so exp never overflows
    const double ref = beta >= 0 ? energies_.minCoeff() : energies_.maxCoeff();
    RVector w = (-beta * (energies_.array() - ref)).exp().matrix();
    w /= w.sum();
    return basis_ * w.cast<cplx>().asDiagonal() * basis_.adjoint();
  }

  const RVector& energies() const noexcept { return energies_; }
  double norm() const noexcept { return norm_; }

private:
  RVector energies_;
  CMatrix basis_;
  double norm_ = 0.0;
};

struct EthFit {
  double beta = 0.0;
  double residual = 0.0;     ///< trace distance to the fitted Gibbs state
  double beta_min = 0.0;     ///< search bracket
  double beta_max = 0.0;
  bool at_boundary = false;  ///< optimum sits on the bracket edge (e.g. pure states)
  int iterations = 0;
};

struct EthFitOptions {
  double beta_max = 0.0;  ///< 0 means scale/‖H_S‖ from Tolerances
  double tolerance = 0.0; ///< 0 means Tolerances::eth_beta_tol
  int scan_points = 401;
  int max_iterations = 500;
};

/// β minimizing ‖ρ − Z⁻¹exp(−βH_S)‖ on [−β_max, β_max].
///
/// A uniform scan locates the basin, golden-section search refines it.
inline EthFit eth_fit(const CMatrix& rho, const CMatrix& HS, EthFitOptions opts = {},
                      const Tolerances& tol = default_tolerances()) {
  if (rho.rows() != HS.rows()) throw DimensionError("eth_fit: ρ and H_S dimensions differ");
  const GibbsFamily family(HS);
  const RVector& e = family.energies();
  for (Eigen::Index k = 0; k + 1 < e.size(); ++k)
    if (e(k + 1) - e(k) <= tol.spectrum_rel * std::max(family.norm(), 1e-300))
      throw InvalidArgumentError("eth_fit: H_S spectrum is degenerate");
  if (opts.beta_max <= 0.0) opts.beta_max = tol.eth_beta_max_scale / family.norm();
  if (opts.tolerance <= 0.0) opts.tolerance = tol.eth_beta_tol;
  if (opts.scan_points < 3) opts.scan_points = 3;

  auto f = [&](double beta) { return trace_distance(rho, family.state(beta)); };
  const double lo = -opts.beta_max, hi = opts.beta_max;
  const double step = (hi - lo) / (opts.scan_points - 1);
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opts.scan_points; ++k) {
    const double v = f(lo + k * step);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double a = lo + std::max(0, best - 1) * step;
  double b = lo + std::min(opts.scan_points - 1, best + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int it = 0;
  while (b - a > opts.tolerance) {
    if (++it > opts.max_iterations)
      throw ConvergenceError("eth_fit: golden-section search did not converge in [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  EthFit fit;
  fit.beta = 0.5 * (a + b);
  fit.residual = f(fit.beta);
  // endpoints can beat the interior when the optimum is at ±β_max
  for (const double edge : {lo, hi}) {
    const double v = f(edge);
    if (v < fit.residual) {
      fit.residual = v;
      fit.beta = edge;
    }
  }
  fit.beta_min = lo;
  fit.beta_max = hi;
  fit.at_boundary = std::abs(std::abs(fit.beta) - opts.beta_max) <= 2 * opts.tolerance + step * 1e-9;
  fit.iterations = it;
  return fit;
}

inline EthFit eth_fit(const DensityMatrix& rho, const CMatrix& HS, EthFitOptions opts = {},
                      const Tolerances& tol = default_tolerances()) {
  return eth_fit(rho.matrix(), HS, opts, tol);
}

}  // namespace isi
