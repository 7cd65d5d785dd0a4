#pragma once

// Exact finite-time evolution of ρ^S(t) in the energy eigenbasis and
// time-averaged equilibration metrics.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <string>
#include <vector>

#include "isi/equilibrium.hpp"
#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/sampling.hpp"
#include "isi/spectral.hpp"

namespace isi {

struct Trajectory {
  RVector times;
  std::vector<DensityMatrix> states;
};

enum class EvolutionRoute {
  automatic,     ///< state_vector
  state_vector,  ///< Ψ(t) = Σ c_n e^{−iE_n t} Ψ_n, then trace out the bath
  pair_cache,    ///< ρ^S(t) = Σ_nm c_n c_m* e^{−i(E_n−E_m)t} ρ^S_nm with cached ρ^S_nm
};

/// n stratified times on [0, T]: one uniform draw inside each of n equal cells.
inline RVector stratified_times(double T, long n, RngStream& rng) {
  if (!(T > 0.0)) throw InvalidArgumentError("stratified_times: T must be positive");
  if (n < 1) throw InvalidArgumentError("stratified_times: need at least one time");
  RVector t(n);
  for (long k = 0; k < n; ++k) t(k) = (static_cast<double>(k) + rng.uniform()) * T / static_cast<double>(n);
  return t;
}

namespace detail {

/// Evaluates ρ^S(t) for each time through Ψ(t), in column batches.
/// `sink(k, rho)` receives the raw dS×dS matrix for times(k).
template <class Sink>
void evolve_state_vector(const OverlapCoefficients& c, const SpectralData& spec, const SpaceLayout& layout,
                         const RVector& times, Sink&& sink) {
  const long d = spec.dim();
  const long dS = layout.dS(), dB = layout.dB();
  const CMatrix& V = spec.eigenvectors;

  // Product eigenstates (commuting model) leave V mostly zeros.
  const long nnz = (V.array() != cplx(0.0, 0.0)).count();
  const bool sparse = nnz <= d * d / 8;
  Eigen::SparseMatrix<cplx> Vs;
  if (sparse) Vs = V.sparseView();

  // only levels with nonzero weight contribute
  std::vector<long> active;
  for (long n = 0; n < d; ++n)
    if (c.c(n) != cplx(0.0, 0.0)) active.push_back(n);

  constexpr long batch = 128;
  CMatrix phases(d, batch);
  CMatrix psi(d, batch);
  for (long start = 0; start < times.size(); start += batch) {
    const long m = std::min(batch, static_cast<long>(times.size()) - start);
    phases.setZero();
    for (long j = 0; j < m; ++j) {
      const double t = times(start + j);
      for (long n : active) phases(n, j) = c.c(n) * std::polar(1.0, -spec.eigenvalues(n) * t);
    }
    if (sparse)
      psi.leftCols(m) = Vs * phases.leftCols(m);
    else
      psi.leftCols(m).noalias() = V * phases.leftCols(m);
    for (long j = 0; j < m; ++j) {
      Eigen::Map<const CMatrix> M(psi.col(j).data(), dB, dS);
      CMatrix rho = M.transpose() * M.conjugate();
      sink(start + j, std::move(rho));
    }
  }
}

template <class Sink>
void evolve_pair_cache(const OverlapCoefficients& c, const SpectralData& spec, const SpaceLayout& layout,
                       const RVector& times, std::size_t max_dim, Sink&& sink) {
  const long d = spec.dim();
  if (static_cast<std::size_t>(d) > max_dim)
    throw CapExceededError("pair cache: dimension " + std::to_string(d) + " exceeds cap " + std::to_string(max_dim));
  const long dS = layout.dS();
  // cache[n*d + m] = c_n c_m* ρ^S_nm
  std::vector<CMatrix> cache(static_cast<std::size_t>(d * d));
  for (long n = 0; n < d; ++n)
    for (long m = 0; m < d; ++m) cache[n * d + m] = c.c(n) * std::conj(c.c(m)) * pair_reduction(spec, layout, n, m);
  for (long k = 0; k < times.size(); ++k) {
    CMatrix rho = CMatrix::Zero(dS, dS);
    for (long n = 0; n < d; ++n)
      for (long m = 0; m < d; ++m)
        rho += std::polar(1.0, -(spec.eigenvalues(n) - spec.eigenvalues(m)) * times(k)) * cache[n * d + m];
    sink(k, std::move(rho));
  }
}

template <class Sink>
void evolve(const OverlapCoefficients& c, const SpectralData& spec, const SpaceLayout& layout, const RVector& times,
            EvolutionRoute route, const Tolerances& tol, Sink&& sink) {
  if (c.dim() != spec.dim() || spec.dim() != layout.d())
    throw DimensionError("evolve: overlaps, spectrum and layout dimensions disagree");
  if (route == EvolutionRoute::pair_cache)
    evolve_pair_cache(c, spec, layout, times, tol.pair_cache_max_dim, sink);
  else
    evolve_state_vector(c, spec, layout, times, sink);
}

}  // namespace detail

/// Exact ρ^S(t) at the requested times.
inline Trajectory evolve_reduced(const OverlapCoefficients& c, const SpectralData& spec, const SpaceLayout& layout,
                                 const RVector& times, EvolutionRoute route = EvolutionRoute::automatic,
                                 const Tolerances& tol = default_tolerances()) {
  std::vector<CMatrix> raw(times.size());
  detail::evolve(c, spec, layout, times, route, tol, [&](long k, CMatrix rho) { raw[k] = std::move(rho); });
  Trajectory traj;
  traj.times = times;
  traj.states.reserve(raw.size());
  for (auto& r : raw) traj.states.push_back(as_system_state(std::move(r), tol));
  return traj;
}

/// Mean of the sampled states of a trajectory.
inline DensityMatrix finite_time_average(const Trajectory& traj, const Tolerances& tol = default_tolerances()) {
  if (traj.states.empty()) throw InvalidArgumentError("finite_time_average: empty trajectory");
  const long dS = traj.states.front().dim();
  CompensatedMatrixSum re(dS, dS), im(dS, dS);
  for (const auto& s : traj.states) {
    re.add(s.matrix().real());
    im.add(s.matrix().imag());
  }
  const double n = static_cast<double>(traj.states.size());
  CMatrix avg = (re.value() / n).cast<cplx>() + I_unit * (im.value() / n).cast<cplx>();
  return as_system_state(std::move(avg), tol);
}

/// (1/T)∫₀ᵀ ρ^S(t) dt estimated on `n_times` stratified times.
inline DensityMatrix finite_time_average(const OverlapCoefficients& c, const SpectralData& spec,
                                         const SpaceLayout& layout, double T, long n_times, RngStream& rng,
                                         const Tolerances& tol = default_tolerances()) {
  const RVector times = stratified_times(T, n_times, rng);
  const long dS = layout.dS();
  CompensatedMatrixSum re(dS, dS), im(dS, dS);
  detail::evolve(c, spec, layout, times, EvolutionRoute::automatic, tol, [&](long, const CMatrix& rho) {
    re.add(rho.real());
    im.add(rho.imag());
  });
  const double n = static_cast<double>(n_times);
  CMatrix avg = (re.value() / n).cast<cplx>() + I_unit * (im.value() / n).cast<cplx>();
  return as_system_state(std::move(avg), tol);
}

/// ρ̄^S = Σ_n |c_n|² ρ^S_n computed straight from the eigenvectors.
inline CMatrix time_average_from_spectrum(const OverlapCoefficients& c, const SpectralData& spec,
                                          const SpaceLayout& layout) {
  const long dS = layout.dS();
  CMatrix acc = CMatrix::Zero(dS, dS);
  for (long n = 0; n < spec.dim(); ++n) {
    const double w = std::norm(c.c(n));
    if (w == 0.0) continue;
    const CVector v = spec.eigenvectors.col(n);
    acc += w * partial_trace_bath(v, v, layout);
  }
  return 0.5 * (acc + acc.adjoint());
}

/// (1/T)∫₀ᵀ ‖ρ^S(t) − ρ̄^S‖ dt on `n_times` stratified times.
inline double equilibration_metric(const OverlapCoefficients& c, const SpectralData& spec, const SpaceLayout& layout,
                                   double T, long n_times, RngStream& rng,
                                   const Tolerances& tol = default_tolerances()) {
  if (n_times < 100) throw InvalidArgumentError("equilibration_metric: n_times must be at least 100");
  const auto check = check_nondegenerate_spectrum(spec, tol.spectrum_rel);
  if (!check.nondegenerate)
    throw DegenerateSpectrumError("equilibration_metric: spectrum is degenerate", check.level, check.level + 1);
  const CMatrix rho_bar = time_average_from_spectrum(c, spec, layout);
  const RVector times = stratified_times(T, n_times, rng);
  CompensatedSum sum;
  detail::evolve(c, spec, layout, times, EvolutionRoute::automatic, tol,
                 [&](long, const CMatrix& rho) { sum.add(trace_distance(rho, rho_bar)); });
  return sum.value() / static_cast<double>(n_times);
}

}  // namespace isi
