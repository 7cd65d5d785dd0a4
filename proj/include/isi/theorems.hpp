#pragma once

// Evaluators for the initial-state-independence bounds: the concentration
// bound on subspace averages and its tail, the necessary condition and its
// spin-1/2 corollaries, the typicality bound for reduced states and the √δ
// sufficient condition. Each evaluator computes both sides and a verdict.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "isi/equilibrium.hpp"
#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/sampling.hpp"
#include "isi/spectral.hpp"

namespace isi {

/// Concentration constant c = 1/(18π³).
inline constexpr double concentration_constant = 1.0 / (18.0 * std::numbers::pi * std::numbers::pi * std::numbers::pi);

enum class TheoremId { T0i, T0ii, T1, T1prime, T2i, T2ii, Popescu, SufficientISI };
enum class Verdict { satisfied, violated, vacuous, indeterminate };

inline const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T0i: return "T0i";
    case TheoremId::T0ii: return "T0ii";
    case TheoremId::T1: return "T1";
    case TheoremId::T1prime: return "T1prime";
    case TheoremId::T2i: return "T2i";
    case TheoremId::T2ii: return "T2ii";
    case TheoremId::Popescu: return "Popescu";
    case TheoremId::SufficientISI: return "SufficientISI";
  }
  return "unknown";
}

inline std::optional<TheoremId> theorem_from_string(const std::string& s) {
  for (auto id : {TheoremId::T0i, TheoremId::T0ii, TheoremId::T1, TheoremId::T1prime, TheoremId::T2i, TheoremId::T2ii,
                  TheoremId::Popescu, TheoremId::SufficientISI})
    if (s == to_string(id)) return id;
  return std::nullopt;
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::vacuous: return "vacuous";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "unknown";
}

struct TheoremReport {
  TheoremId id = TheoremId::T0i;
  double lhs = 0.0;
  double rhs = 0.0;
  std::map<std::string, double> parameters;
  Verdict verdict = Verdict::indeterminate;
  std::string note;

  bool vacuous() const noexcept { return verdict == Verdict::vacuous; }
};

/// Largest value the left-hand side of each bound can take.
inline double max_lhs(TheoremId id) {
  switch (id) {
    case TheoremId::T0i:
    case TheoremId::T1:
    case TheoremId::T1prime: return 2.0;  // trace distance
    case TheoremId::T0ii:
    case TheoremId::Popescu: return 1.0;  // probability
    case TheoremId::T2i:
    case TheoremId::T2ii: return 1.0;     // averages of |p_n| ≤ 1 quantities
    case TheoremId::SufficientISI: return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Formulas

struct Theorem0Rhs {
  double strong = 0.0;  ///< √(d_S δ / d_R)
  double weak = 0.0;    ///< √(d_S / d_R)
};

inline Theorem0Rhs theorem0_rhs(long dS, long dR, double delta) {
  if (dR < 1 || dS < 1) throw InvalidArgumentError("theorem0_rhs: dimensions must be positive");
  if (!(delta > 0.0) || delta > 1.0 + 1e-12) throw InvalidArgumentError("theorem0_rhs: δ must lie in (0, 1]");
  return {std::sqrt(dS * delta / dR), std::sqrt(static_cast<double>(dS) / dR)};
}

/// 2 exp(−c d ε²): tail bound shared by the subspace and full-space concentration results.
inline double concentration_tail_bound(long dim, double epsilon) {
  return 2.0 * std::exp(-concentration_constant * static_cast<double>(dim) * epsilon * epsilon);
}

/// ε′ = ε + 2√(d_S/d_R) + 2/d_R^{1/3} + (8/p) e^{−c d_R^{1/3}}; +∞ when p = 0.
inline double epsilon_prime(double epsilon, long dS, double dR, double p) {
  if (!(dR >= 1.0)) throw InvalidArgumentError("epsilon_prime: d_R must be >= 1");
  if (p < 0.0 || p > 1.0 || std::isnan(p)) throw InvalidArgumentError("epsilon_prime: p must lie in [0, 1]");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  const double cbrt = std::cbrt(dR);
  return epsilon + 2.0 * std::sqrt(dS / dR) + 2.0 / cbrt + (8.0 / p) * std::exp(-concentration_constant * cbrt);
}

struct PopescuBound {
  double distance = 0.0;     ///< √(d_S/d_B) + ε
  double probability = 0.0;  ///< 2 e^{−c d_B ε²}
};

inline PopescuBound popescu_bound(long dS, long dB, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("popescu_bound: ε must be positive");
  return {std::sqrt(static_cast<double>(dS) / dB) + epsilon, concentration_tail_bound(dB, epsilon)};
}

// ---------------------------------------------------------------------------
// Verdicts and report consistency

inline Verdict decide(TheoremId id, double lhs, double rhs, bool strict = false, double slack = 0.0) {
  if (rhs >= max_lhs(id)) return Verdict::vacuous;
  const double l = lhs - slack;
  return (strict ? l < rhs : l <= rhs) ? Verdict::satisfied : Verdict::violated;
}

namespace detail {
inline double param(const TheoremReport& r, const char* key) {
  const auto it = r.parameters.find(key);
  if (it == r.parameters.end())
    throw InvalidArgumentError(std::string("report ") + to_string(r.id) + " lacks parameter '" + key + "'");
  return it->second;
}

inline double eps_prime_of(const TheoremReport& r) {
  if (r.parameters.count("eps") && r.parameters.count("p") && r.parameters.count("dR"))
    return epsilon_prime(param(r, "eps"), static_cast<long>(param(r, "dS")), param(r, "dR"), param(r, "p"));
  return param(r, "eps_prime");
}
}  // namespace detail

/// Recomputes the right-hand side from the recorded parameters.
inline double recompute_rhs(const TheoremReport& r) {
  using detail::param;
  switch (r.id) {
    case TheoremId::T0i:
      return theorem0_rhs(static_cast<long>(param(r, "dS")), static_cast<long>(param(r, "dR")), param(r, "delta")).strong;
    case TheoremId::T0ii: return concentration_tail_bound(static_cast<long>(param(r, "dR")), param(r, "eps"));
    case TheoremId::T1:
    case TheoremId::T1prime: return detail::eps_prime_of(r);
    case TheoremId::T2i: return std::sqrt(3.0) * detail::eps_prime_of(r);
    case TheoremId::T2ii: return 3.0 * detail::eps_prime_of(r);
    case TheoremId::Popescu:
      return popescu_bound(static_cast<long>(param(r, "dS")), static_cast<long>(param(r, "dB")), param(r, "eps"))
          .probability;
    case TheoremId::SufficientISI: return param(r, "threshold");
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline bool report_self_consistent(const TheoremReport& r, double tol = 1e-12) {
  const double again = recompute_rhs(r);
  if (std::isinf(again) || std::isinf(r.rhs)) return again == r.rhs;
  return std::abs(again - r.rhs) <= tol * std::max(1.0, std::abs(r.rhs));
}

// ---------------------------------------------------------------------------
// Monte Carlo over a subspace of the composite space

/// Samples Ψ uniformly in H_R and evaluates ‖ρ̄^S[Ψ] − ⟨ρ̄^S⟩_{H_R}‖.
class SubspaceEquilibriumSampler {
public:
  SubspaceEquilibriumSampler(const SubspaceBasis& subspace, const SpectralData& spec, const EigenstateReductions& red)
      : dR_(subspace.dim()), dS_(red.layout.dS()) {
    detail::require_nondegenerate(red, "subspace sampler");
    // On the whole space the uniform measure is unitarily invariant, so the
    // eigenbasis itself serves as the sampling basis.
    full_ = subspace.dim() == subspace.ambient_dim();
    if (!full_) proj_ = spec.eigenvectors.adjoint() * subspace.columns();
    stacked_.resize(dS_ * dS_, red.dim());
    for (long n = 0; n < red.dim(); ++n)
      stacked_.col(n) = Eigen::Map<const CVector>(red.rho[n].matrix().data(), dS_ * dS_);
    const RVector w = full_ ? RVector(RVector::Constant(red.dim(), 1.0 / static_cast<double>(dR_)))
                            : RVector(proj_.rowwise().squaredNorm() / static_cast<double>(dR_));
    mean_ = unstack(stacked_ * w.cast<cplx>());
  }

  /// ρ̄^S for one fresh uniform draw.
  CMatrix draw(RngStream& rng) const {
    const CVector z = sample_sphere_coordinates(dR_, rng);
    const RVector weights = full_ ? RVector(z.cwiseAbs2()) : RVector((proj_ * z).cwiseAbs2());
    return unstack(stacked_ * weights.cast<cplx>());
  }

  double draw_distance(RngStream& rng) const { return trace_distance(draw(rng), mean_); }

  const CMatrix& mean() const noexcept { return mean_; }
  long dR() const noexcept { return dR_; }

private:
  CMatrix unstack(const CVector& v) const {
    CMatrix m = Eigen::Map<const CMatrix>(v.data(), dS_, dS_);
    return 0.5 * (m + m.adjoint());
  }

  long dR_;
  long dS_;
  bool full_ = false;
  CMatrix proj_;     ///< V† B, d × d_R
  CMatrix stacked_;  ///< vec(ρ^S_n) as columns
  CMatrix mean_;
};

/// ⟨‖ρ̄^S − ⟨ρ̄^S⟩_{H_R}‖⟩_{H_R} with the subspace mean computed exactly.
inline MonteCarloEstimate theorem0_empirical_lhs(const SubspaceBasis& subspace, const SpectralData& spec,
                                                 const EigenstateReductions& red, const MonteCarloOptions& opts) {
  const SubspaceEquilibriumSampler sampler(subspace, spec, red);
  return monte_carlo_average([](double x) { return x; },
                             [&](RngStream& rng) { return sampler.draw_distance(rng); }, opts);
}

struct TailFrequency {
  double frequency = 0.0;
  double threshold = 0.0;  ///< distance that counts as an exceedance
  double bound = 0.0;      ///< probability bound
  long exceedances = 0;
  long n_samples = 0;
  std::uint64_t seed = 0;
};

/// Empirical Pr{‖ρ̄^S − ⟨ρ̄^S⟩_{H_R}‖ > √(d_S δ/d_R) + ε} and 2e^{−c d_R ε²}.
inline TailFrequency theorem0_tail_frequency(const SubspaceBasis& subspace, const SpectralData& spec,
                                             const EigenstateReductions& red, double epsilon,
                                             const MonteCarloOptions& opts) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("theorem0_tail_frequency: ε must be positive");
  const SubspaceEquilibriumSampler sampler(subspace, spec, red);
  const double d = delta(red, subspace, spec);
  TailFrequency out;
  out.threshold = theorem0_rhs(red.layout.dS(), subspace.dim(), std::min(d, 1.0)).strong + epsilon;
  out.bound = concentration_tail_bound(subspace.dim(), epsilon);
  const auto est = monte_carlo_average([&](double x) { return x > out.threshold ? 1.0 : 0.0; },
                                       [&](RngStream& rng) { return sampler.draw_distance(rng); }, opts);
  out.frequency = est.mean;
  out.exceedances = std::lround(est.mean * static_cast<double>(opts.n_samples));
  out.n_samples = opts.n_samples;
  out.seed = opts.seed;
  return out;
}

/// Empirical Pr{‖tr_B|Ψ⟩⟨Ψ| − 1/d_S‖ > √(d_S/d_B) + ε} for Ψ uniform on the full space.
inline TailFrequency popescu_tail_frequency(const SpaceLayout& layout, double epsilon, const MonteCarloOptions& opts) {
  const PopescuBound b = popescu_bound(layout.dS(), layout.dB(), epsilon);
  const CMatrix mixed = CMatrix::Identity(layout.dS(), layout.dS()) / static_cast<double>(layout.dS());
  const long d = layout.d();
  const auto est = monte_carlo_average(
      [&](double x) { return x > b.distance ? 1.0 : 0.0; },
      [&](RngStream& rng) {
        const CVector z = sample_sphere_coordinates(d, rng);
        return trace_distance(partial_trace_bath(z, z, layout), mixed);
      },
      opts);
  TailFrequency out;
  out.frequency = est.mean;
  out.threshold = b.distance;
  out.bound = b.probability;
  out.exceedances = std::lround(est.mean * static_cast<double>(opts.n_samples));
  out.n_samples = opts.n_samples;
  out.seed = opts.seed;
  return out;
}

// ---------------------------------------------------------------------------
// Necessary condition

struct NecessaryConditionResult {
  double value = 0.0;
  bool exact = false;  ///< closed form (d_S = 2) rather than a multistart lower bound
  int starts = 0;
  CVector maximizer;   ///< ψ attaining the value
};

struct NecessaryConditionOptions {
  int starts = 512;
  double tolerance = 1e-8;
  std::uint64_t seed = 1;
};

namespace detail {

/// 3×3 matrix whose largest singular value is the d_S = 2 supremum:
/// (1/(2 d_R)) Σ_n p_n q_nᵀ with q_n the Bloch vectors of τ_n.
inline Eigen::Matrix3d spin_response(const std::vector<CMatrix>& tau, const EigenstateReductions& red, long dR) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  for (long n = 0; n < red.dim(); ++n) {
    const Eigen::Vector3d q = bloch_vector(tau[n]).vec();
    A += red.bloch[n].vec() * q.transpose();
  }
  return A / (2.0 * static_cast<double>(dR));
}

inline CVector bloch_to_state(const Eigen::Vector3d& p) {
  // |ψ⟩ = (cos θ/2, e^{iφ} sin θ/2)
  const double theta = std::acos(std::clamp(p(2) / std::max(p.norm(), 1e-300), -1.0, 1.0));
  const double phi = std::atan2(p(1), p(0));
  CVector psi(2);
  psi << std::cos(theta / 2), std::polar(std::sin(theta / 2), phi);
  return psi;
}

/// sup_ψ ‖Σ_n tr(τ_n ψψ†)/d_R ρ_n − reference‖ by multistart coordinate ascent.
inline NecessaryConditionResult multistart_sup(const std::vector<CMatrix>& tau, const EigenstateReductions& red,
                                               long dR, const NecessaryConditionOptions& opts) {
  const long dS = red.layout.dS(), d = red.dim();
  CMatrix R(dS * dS, d), T(dS * dS, d);
  for (long n = 0; n < d; ++n) {
    R.col(n) = Eigen::Map<const CVector>(red.rho[n].matrix().data(), dS * dS);
    T.col(n) = Eigen::Map<const CVector>(tau[n].data(), dS * dS);
  }
  const CMatrix K = R * T.adjoint() / static_cast<double>(dR);
  const CVector ref = K * Eigen::Map<const CVector>(CMatrix(CMatrix::Identity(dS, dS) / double(dS)).data(), dS * dS);
  auto f = [&](const CVector& psi) {
    const CMatrix X = psi * psi.adjoint();
    const CVector m = K * Eigen::Map<const CVector>(X.data(), dS * dS) - ref;
    return trace_norm_hermitian(Eigen::Map<const CMatrix>(m.data(), dS, dS));
  };
  NecessaryConditionResult best;
  best.value = -1.0;
  RngStream rng(opts.seed, 0);
  for (int s = 0; s < opts.starts; ++s) {
    CVector psi = sample_sphere_coordinates(dS, rng);
    double val = f(psi);
    double h = 0.5;
    while (h > opts.tolerance) {
      bool improved = false;
      for (long k = 0; k < 2 * dS; ++k)
        for (const double sign : {1.0, -1.0}) {
          CVector trial = psi;
          trial(k / 2) += (k % 2 == 0) ? cplx(sign * h, 0.0) : cplx(0.0, sign * h);
          trial.normalize();
          const double v = f(trial);
          if (v > val) {
            val = v;
            psi = trial;
            improved = true;
          }
        }
      if (!improved) h *= 0.5;
    }
    if (val > best.value) {
      best.value = val;
      best.maximizer = psi;
    }
  }
  best.starts = opts.starts;
  best.exact = false;
  return best;
}

inline std::vector<CMatrix> projected_reductions(const SpectralData& spec, const SpaceLayout& layout,
                                                 const SubspaceBasis& bath_subspace) {
  if (bath_subspace.ambient_dim() != layout.dB() || bath_subspace.space() != Space::bath)
    throw DimensionError("bath subspace must live in the bath space");
  const CMatrix Pi = bath_subspace.columns() * bath_subspace.columns().adjoint();
  std::vector<CMatrix> tau;
  tau.reserve(spec.dim());
  for (long n = 0; n < spec.dim(); ++n) {
    CVector v = spec.eigenvectors.col(n);
    Eigen::Map<CMatrix> M(v.data(), layout.dB(), layout.dS());
    M = Pi * M;  // (1 ⊗ Π) v
    tau.push_back(partial_trace_bath(v, v, layout));
  }
  return tau;
}

}  // namespace detail

/// sup_ψ ‖⟨ρ̄^S⟩_{B_R}[ψ] − ⟨ρ̄^S⟩_{S⊗B_R}‖ for a bath subspace B_R.
inline NecessaryConditionResult necessary_condition_lhs(const EigenstateReductions& red, const SpectralData& spec,
                                                        const SubspaceBasis& bath_subspace,
                                                        const NecessaryConditionOptions& opts = {}) {
  detail::require_nondegenerate(red, "necessary_condition_lhs");
  const auto tau = detail::projected_reductions(spec, red.layout, bath_subspace);
  const long dR = bath_subspace.dim();
  if (red.layout.dS() == 2) {
    const Eigen::Matrix3d A = detail::spin_response(tau, red, dR);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullV);
    NecessaryConditionResult r;
    r.value = svd.singularValues()(0);
    r.exact = true;
    r.maximizer = detail::bloch_to_state(svd.matrixV().col(0));
    return r;
  }
  return detail::multistart_sup(tau, red, dR, opts);
}

/// 3×3 matrix A = d⁻¹ Σ_n p_n p_nᵀ (d_S = 2).
inline Eigen::Matrix3d spin_average_matrix(const EigenstateReductions& red) {
  if (red.layout.dS() != 2) throw DimensionError("spin_average_matrix requires d_S = 2");
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  for (const auto& p : red.bloch) G += p.vec() * p.vec().transpose();
  return G / static_cast<double>(red.dim());
}

/// sup_ψ ‖(1/d_B) Σ_n ⟨ψ|ρ^S_n|ψ⟩ ρ^S_n − 1/d_S‖ (full bath).
///
/// For d_S = 2 this is λ_max(A), attained at p₀ along the top eigenvector.
/// For larger systems it is a lower bound from multistart ascent.
inline NecessaryConditionResult necessary_condition_lhs(const EigenstateReductions& red,
                                                        const NecessaryConditionOptions& opts = {}) {
  detail::require_nondegenerate(red, "necessary_condition_lhs");
  if (red.layout.dS() == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(spin_average_matrix(red));
    NecessaryConditionResult r;
    r.value = std::max(0.0, es.eigenvalues()(2));
    r.exact = true;
    r.maximizer = detail::bloch_to_state(es.eigenvectors().col(2));
    return r;
  }
  std::vector<CMatrix> tau;
  tau.reserve(red.dim());
  for (const auto& r : red.rho) tau.push_back(r.matrix());
  return detail::multistart_sup(tau, red, red.layout.dB(), opts);
}

// ---------------------------------------------------------------------------
// Spin-1/2 forms

struct Theorem2Lhs {
  double lhs_i = 0.0;        ///< [d⁻² ΣΣ (p_n·p_m)²]^{1/2} = ‖G‖_F / d
  double lhs_ii = 0.0;       ///< d⁻¹ Σ p_n²
  double lambda_max_A = 0.0; ///< largest eigenvalue of A = G/d
};

/// Gram-type matrix G = Σ_n p_n p_nᵀ of a set of 3-vectors.
inline Eigen::Matrix3d polarization_gram(const std::vector<Eigen::Vector3d>& ps) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  for (const auto& p : ps) G += p * p.transpose();
  return G;
}

inline Theorem2Lhs theorem2_lhs(const std::vector<Eigen::Vector3d>& ps) {
  if (ps.empty()) throw InvalidArgumentError("theorem2_lhs: empty vector set");
  const Eigen::Matrix3d G = polarization_gram(ps);
  const double d = static_cast<double>(ps.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(G);
  return {std::sqrt((G * G).trace()) / d, G.trace() / d, std::max(0.0, es.eigenvalues()(2)) / d};
}

inline Theorem2Lhs theorem2_lhs(const EigenstateReductions& red) {
  if (red.layout.dS() != 2) throw DimensionError("theorem2_lhs requires d_S = 2");
  std::vector<Eigen::Vector3d> ps;
  ps.reserve(red.bloch.size());
  for (const auto& b : red.bloch) ps.push_back(b.vec());
  return theorem2_lhs(ps);
}

// ---------------------------------------------------------------------------
// Report builders

inline TheoremReport report_theorem0_i(long dS, long dR, double delta, const MonteCarloEstimate& lhs) {
  TheoremReport r;
  r.id = TheoremId::T0i;
  r.lhs = lhs.mean;
  r.rhs = theorem0_rhs(dS, dR, delta).strong;
  r.parameters = {{"dS", double(dS)},
                  {"dR", double(dR)},
                  {"delta", delta},
                  {"lhs_standard_error", lhs.standard_error},
                  {"n_samples", double(lhs.n_samples)},
                  {"seed", double(lhs.seed)},
                  {"weak_rhs", theorem0_rhs(dS, dR, delta).weak}};
  // violated only if the sample mean exceeds the bound by more than 3 SE
  r.verdict = decide(r.id, r.lhs, r.rhs, false, 3.0 * lhs.standard_error);
  return r;
}

inline TheoremReport report_theorem0_ii(long dS, long dR, double delta, double epsilon, const TailFrequency& tail) {
  TheoremReport r;
  r.id = TheoremId::T0ii;
  r.lhs = tail.frequency;
  r.rhs = concentration_tail_bound(dR, epsilon);
  r.parameters = {{"dS", double(dS)},       {"dR", double(dR)},          {"delta", delta},
                  {"eps", epsilon},         {"c", concentration_constant}, {"threshold", tail.threshold},
                  {"n_samples", double(tail.n_samples)}, {"seed", double(tail.seed)}};
  r.verdict = decide(r.id, r.lhs, r.rhs);
  return r;
}

/// Necessary-condition report; `general` selects T1 (bath subspace) over T1prime.
inline TheoremReport report_necessary_condition(const NecessaryConditionResult& lhs, double epsilon, long dS, long dR,
                                                double p, bool general = false) {
  TheoremReport r;
  r.id = general ? TheoremId::T1 : TheoremId::T1prime;
  r.lhs = lhs.value;
  r.rhs = epsilon_prime(epsilon, dS, dR, p);
  r.parameters = {{"dS", double(dS)},  {"dR", double(dR)},          {"eps", epsilon}, {"p", p},
                  {"c", concentration_constant}, {"exact", lhs.exact ? 1.0 : 0.0}, {"starts", double(lhs.starts)}};
  r.verdict = decide(r.id, r.lhs, r.rhs, true);
  if (std::isinf(r.rhs)) r.note = "p = 0: epsilon' is infinite";
  return r;
}

/// Spin-1/2 reports with ε′ from the formula (ε, d_S, d_R = d_B, p).
inline TheoremReport report_theorem2(TheoremId id, const Theorem2Lhs& lhs, double epsilon, long dS, long dR, double p) {
  if (id != TheoremId::T2i && id != TheoremId::T2ii) throw InvalidArgumentError("report_theorem2: id must be T2i or T2ii");
  TheoremReport r;
  r.id = id;
  const double ep = epsilon_prime(epsilon, dS, dR, p);
  r.lhs = id == TheoremId::T2i ? lhs.lhs_i : lhs.lhs_ii;
  r.rhs = (id == TheoremId::T2i ? std::sqrt(3.0) : 3.0) * ep;
  r.parameters = {{"dS", double(dS)}, {"dR", double(dR)}, {"eps", epsilon}, {"p", p},
                  {"c", concentration_constant}, {"eps_prime", ep}};
  r.verdict = decide(id, r.lhs, r.rhs, true);
  return r;
}

/// Spin-1/2 reports against a target accuracy ε′ given directly.
inline TheoremReport report_theorem2_target(TheoremId id, const Theorem2Lhs& lhs, double eps_prime) {
  if (id != TheoremId::T2i && id != TheoremId::T2ii) throw InvalidArgumentError("report_theorem2: id must be T2i or T2ii");
  TheoremReport r;
  r.id = id;
  r.lhs = id == TheoremId::T2i ? lhs.lhs_i : lhs.lhs_ii;
  r.rhs = (id == TheoremId::T2i ? std::sqrt(3.0) : 3.0) * eps_prime;
  r.parameters = {{"dS", 2.0}, {"eps_prime", eps_prime}};
  r.verdict = decide(id, r.lhs, r.rhs, true);
  r.note = "target accuracy";
  return r;
}

inline TheoremReport report_popescu(const SpaceLayout& layout, double epsilon, const TailFrequency& tail) {
  TheoremReport r;
  r.id = TheoremId::Popescu;
  r.lhs = tail.frequency;
  r.rhs = popescu_bound(layout.dS(), layout.dB(), epsilon).probability;
  r.parameters = {{"dS", double(layout.dS())}, {"dB", double(layout.dB())}, {"eps", epsilon},
                  {"c", concentration_constant}, {"distance_bound", tail.threshold},
                  {"n_samples", double(tail.n_samples)}, {"seed", double(tail.seed)}};
  r.verdict = decide(r.id, r.lhs, r.rhs);
  return r;
}

/// √δ against a smallness threshold; a tie within 1e-12 is indeterminate.
inline TheoremReport sufficient_condition_report(double delta, double threshold = 0.1) {
  if (!(delta > 0.0)) throw InvalidArgumentError("sufficient_condition_report: δ must be positive");
  TheoremReport r;
  r.id = TheoremId::SufficientISI;
  r.lhs = std::sqrt(delta);
  r.rhs = threshold;
  r.parameters = {{"delta", delta}, {"threshold", threshold}};
  if (std::abs(r.lhs - threshold) <= 1e-12) {
    r.verdict = Verdict::indeterminate;
    r.note = "boundary: sqrt(delta) equals the threshold";
  } else {
    r.verdict = r.lhs < threshold ? Verdict::satisfied : Verdict::violated;
  }
  return r;
}

}  // namespace isi
