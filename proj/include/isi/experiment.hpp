#pragma once

// Experiment pipeline behind the isi-bench tool: model → spectrum →
// eigenstate reductions → theorem reports → dynamics, each stage writing
// plain CSV/JSON data files plus lines for a human-readable summary.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "isi/config.hpp"
#include "isi/dynamics.hpp"
#include "isi/equilibrium.hpp"
#include "isi/matrix_io.hpp"
#include "isi/models.hpp"
#include "isi/theorems.hpp"

namespace isi {

inline constexpr int schema_version = 1;

// ---------------------------------------------------------------------------
// Model construction

struct BuiltModel {
  SpaceLayout layout{2, 1};
  CMatrix HS;
  std::optional<CompositeHamiltonian> hamiltonian;  ///< dense parts; absent for large analytic models
  std::optional<CommutingModelSpec> commuting;
  SpectralData spec;
  bool analytic = false;
};

namespace detail {

inline std::vector<double> uniform_list(int n, double scale, RngStream& rng) {
  std::vector<double> out(n);
  for (auto& x : out) x = scale * (2.0 * rng.uniform() - 1.0);
  return out;
}

inline std::string resolve_path(const std::string& base, const std::string& file) {
  if (!file.empty() && file.front() == '/') return file;
  return base + "/" + file;
}

}  // namespace detail

/// Builds the configured Hamiltonian and its eigensystem. The commuting and
/// dephasing models use the closed-form eigenpairs.
inline BuiltModel build_model(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  RngStream rng(cfg.seed, 0);
  BuiltModel out;
  if (m.kind == ModelKind::commuting || m.kind == ModelKind::cucchietti) {
    CommutingModelSpec spec;
    if (m.kind == ModelKind::commuting) {
      if (static_cast<std::size_t>(2 * m.dB) > cfg.tol.decomposition_max_dim)
        throw CapExceededError("commuting model: composite dimension " + std::to_string(2 * m.dB) + " exceeds cap");
      spec = random_commuting_spec(m.dB, m.omega, m.v_scale, m.eb_scale, rng);
    } else {
      const auto g = detail::uniform_list(m.n_spins, m.g_scale, rng);
      const auto eps = detail::uniform_list(m.n_spins, m.eps_scale, rng);
      spec = build_cucchietti_bath(m.n_spins, g, eps, m.omega, static_cast<long>(cfg.tol.decomposition_max_dim));
    }
    out.layout = SpaceLayout(2, spec.dB());
    out.HS = 0.5 * m.omega * pauli_matrices()[2];
    if (out.layout.d() <= 2048) out.hamiltonian = build_commuting_model(spec, cfg.tol);
    out.spec = analytic_eigensystem(spec);
    out.commuting = std::move(spec);
    out.analytic = true;
    return out;
  }
  CompositeHamiltonian h = m.kind == ModelKind::random
                               ? build_random_model(m.dS, m.dB, m.strength, rng, cfg.tol)
                               : load_hamiltonian(detail::resolve_path(cfg.base_dir, m.file), cfg.tol);
  out.layout = h.layout;
  out.HS = h.HS;
  out.spec = eigendecompose(h, cfg.tol);
  out.hamiltonian = std::move(h);
  return out;
}

// ---------------------------------------------------------------------------
// Run context and output helpers

struct RunContext {
  ExperimentConfig cfg;
  int jobs = 1;
  std::filesystem::path out;
  BuiltModel model;
  std::optional<EigenstateReductions> red;
  std::vector<std::string> summary;
};

namespace detail {

inline std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string short_fmt(double x, int digits = 6) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  return f;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto f = open_output(path);
  f << j.dump(2) << "\n";
}

inline nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(long n, int jobs, F&& body) {
  const int workers = static_cast<int>(std::max(1L, std::min<long>(jobs, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (long i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline bool wants(const ExperimentConfig& cfg, TheoremId id) {
  const auto& list = cfg.analysis.theorems;
  return std::find(list.begin(), list.end(), "all") != list.end() ||
         std::find(list.begin(), list.end(), to_string(id)) != list.end();
}

}  // namespace detail

inline nlohmann::json report_to_json(const TheoremReport& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.parameters) params[k] = detail::number(v);
  return {{"schema_version", schema_version},
          {"theorem", to_string(r.id)},
          {"lhs", detail::number(r.lhs)},
          {"rhs", detail::number(r.rhs)},
          {"rhs_infinite", std::isinf(r.rhs)},
          {"verdict", to_string(r.verdict)},
          {"vacuous", r.vacuous()},
          {"parameters", params},
          {"note", r.note}};
}

/// System state ψ of the restricted subspace ψ ⊗ B_R.
inline PureState system_state(const ExperimentConfig& cfg, long dS) {
  const auto& which = cfg.analysis.psi;
  if (which == "up") return PureState::basis(dS, 0, Space::system);
  if (which == "down") return PureState::basis(dS, 1, Space::system);
  if (which == "plus") {
    CVector v = CVector::Zero(dS);
    v(0) = v(1) = 1.0;
    return PureState::normalized(v, Space::system);
  }
  RngStream rng(cfg.seed, 7);
  return PureState(sample_sphere_coordinates(dS, rng), Space::system);
}

inline long bath_subspace_dim(const ExperimentConfig& cfg, const SpaceLayout& layout) {
  const long dR = cfg.analysis.dR == 0 ? layout.dB() : cfg.analysis.dR;
  if (dR > layout.dB()) throw ConfigError("analysis.dR exceeds the bath dimension");
  return dR;
}

/// Builds the model and, when needed, the eigenstate reductions. Refuses a
/// degenerate spectrum unless the configuration allows it.
inline RunContext prepare(const ExperimentConfig& cfg, int jobs, bool need_reductions) {
  validate(cfg);
  RunContext ctx;
  ctx.cfg = cfg;
  ctx.jobs = std::max(1, jobs);
  ctx.out = cfg.out;
  ctx.model = build_model(cfg);
  if (need_reductions) {
    ctx.red = eigenstate_reductions(ctx.model.spec, ctx.model.layout, cfg.tol);
    if (!ctx.red->nondegenerate && !cfg.analysis.allow_degenerate)
      throw DegenerateSpectrumError("spectrum is degenerate at level " + std::to_string(ctx.red->spacing_level) +
                                        " (set analysis.allow_degenerate = true to continue)",
                                    ctx.red->spacing_level, ctx.red->spacing_level + 1);
  }
  const auto& L = ctx.model.layout;
  ctx.summary.push_back(std::string("model: ") + to_string(cfg.model.kind) + " dS=" + std::to_string(L.dS()) +
                        " dB=" + std::to_string(L.dB()) + " d=" + std::to_string(L.d()) +
                        " seed=" + std::to_string(cfg.seed) + (ctx.model.analytic ? " (closed-form eigensystem)" : ""));
  return ctx;
}

// ---------------------------------------------------------------------------
// Stages

inline void stage_model_info(RunContext& ctx) {
  const auto& m = ctx.model;
  nlohmann::json j{{"schema_version", schema_version},
                   {"kind", to_string(ctx.cfg.model.kind)},
                   {"dS", m.layout.dS()},
                   {"dB", m.layout.dB()},
                   {"d", m.layout.d()},
                   {"seed", ctx.cfg.seed},
                   {"norm", m.spec.norm},
                   {"analytic_eigensystem", m.analytic}};
  if (m.commuting) {
    const auto ops = commuting_model_bath_operators(*m.commuting);
    double worst = 0.0;
    if (m.layout.dB() <= 2048)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) worst = std::max(worst, commutator_norm(ops[a], ops[b]));
    j["omega"] = m.commuting->omega;
    j["max_bath_commutator"] = worst;
    ctx.summary.push_back("bath operators commute: max |[A,B]| = " + detail::short_fmt(worst));
  }
  if (ctx.cfg.model.kind == ModelKind::random) {
    j["ensemble"] = "gaussian hermitian";
    j["variance"] = {{"HS", 1.0 / m.layout.dS()}, {"HB", 1.0 / m.layout.dB()}, {"HSB", 1.0 / m.layout.d()}};
    j["coupling_strength"] = ctx.cfg.model.strength;
  }
  if (m.hamiltonian) {
    const CMatrix& HS = m.hamiltonian->HS;
    j["HS_norm"] = HS.cwiseAbs().maxCoeff();
    j["HSB_max_abs"] = m.hamiltonian->HSB.cwiseAbs().maxCoeff();
  }
  detail::write_json(ctx.out / "model.json", j);
  ctx.summary.push_back("spectral norm max|E_n| = " + detail::short_fmt(m.spec.norm));
}

inline void stage_spectrum(RunContext& ctx) {
  auto& spec = ctx.model.spec;
  const auto& tol = ctx.cfg.tol;
  {
    auto f = detail::open_output(ctx.out / "spectrum.csv");
    f << "# schema_version: " << schema_version << "\n";
    f << "n,E_n\n";
    for (long n = 0; n < spec.dim(); ++n) f << n << "," << detail::fmt(spec.eigenvalues(n)) << "\n";
  }
  const auto levels = check_nondegenerate_spectrum(spec, tol.spectrum_rel);
  nlohmann::json j{{"schema_version", schema_version},
                   {"d", spec.dim()},
                   {"norm", spec.norm},
                   {"nondegenerate", levels.nondegenerate},
                   {"min_level_spacing", levels.min_level_spacing}};
  if (ctx.model.hamiltonian && !ctx.model.analytic) {
    const auto r = spectral_residuals(spec, ctx.model.hamiltonian->H);
    j["max_residual"] = r.max_residual;
    j["unitarity"] = r.unitarity;
  }
  ctx.summary.push_back(std::string("spectrum: nondegenerate = ") + (levels.nondegenerate ? "true" : "false") +
                        ", min level spacing = " + detail::short_fmt(levels.min_level_spacing));
  if (static_cast<std::size_t>(spec.dim()) <= tol.gap_check_max_dim) {
    const auto gaps = check_nondegenerate_gaps(spec, tol);
    j["gaps_nondegenerate"] = gaps.nondegenerate;
    j["min_gap_collision"] = gaps.min_gap_collision;
    ctx.summary.push_back(std::string("gap check: nondegenerate gaps = ") + (gaps.nondegenerate ? "true" : "false") +
                          " (" + std::to_string(gaps.n_gaps) + " gaps, closest pair " +
                          detail::short_fmt(gaps.min_gap_collision) + ")");
  } else {
    j["gaps_nondegenerate"] = nullptr;
    ctx.summary.push_back("gap check: skipped, d exceeds " + std::to_string(tol.gap_check_max_dim));
  }
  detail::write_json(ctx.out / "spectrum.json", j);
}

inline void stage_equilibrium(RunContext& ctx) {
  const auto& red = *ctx.red;
  const auto& L = ctx.model.layout;
  const auto& spec = ctx.model.spec;
  const auto& cfg = ctx.cfg;

  // per-eigenstate Gibbs fit, only for a nondegenerate H_S
  std::vector<std::optional<EthFit>> fits(red.dim());
  bool eth = cfg.analysis.eth_fit;
  if (eth) {
    try {
      GibbsFamily probe(ctx.model.HS);
      (void)eth_fit(red.rho[0].matrix(), ctx.model.HS, {}, cfg.tol);
    } catch (const InvalidArgumentError&) {
      eth = false;
      ctx.summary.push_back("eth fit: skipped, H_S is degenerate");
    }
  }
  if (eth)
    detail::parallel_for(red.dim(), ctx.jobs,
                         [&](long n) { fits[n] = eth_fit(red.rho[n].matrix(), ctx.model.HS, {}, cfg.tol); });

  {
    auto f = detail::open_output(ctx.out / "reductions.csv");
    f << "# schema_version: " << schema_version << "\n";
    f << "n,E_n,purity";
    if (L.dS() == 2) f << ",p_x,p_y,p_z";
    if (eth) f << ",beta,gibbs_distance,beta_at_boundary";
    f << "\n";
    for (long n = 0; n < red.dim(); ++n) {
      f << n << "," << detail::fmt(red.energies(n)) << "," << detail::fmt(red.purity(n));
      if (L.dS() == 2)
        f << "," << detail::fmt(red.bloch[n].x) << "," << detail::fmt(red.bloch[n].y) << ","
          << detail::fmt(red.bloch[n].z);
      if (eth) f << "," << detail::fmt(fits[n]->beta) << "," << detail::fmt(fits[n]->residual) << ","
                 << (fits[n]->at_boundary ? 1 : 0);
      f << "\n";
    }
  }

  const PureState psi = system_state(cfg, L.dS());
  const long dR = bath_subspace_dim(cfg, L);
  const auto HR = SubspaceBasis::system_times(psi, SubspaceBasis::leading(L.dB(), dR, Space::bath), L);
  const double d = delta(red, HR, spec);
  const CMatrix bath_avg = bath_averaged_matrix(psi, red);
  const double completeness = completeness_deviation(red);

  auto matrix_json = [](const CMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (long k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json j{{"schema_version", schema_version},
                   {"dR", dR},
                   {"psi", cfg.analysis.psi},
                   {"delta", d},
                   {"mean_purity", red.purity.mean()},
                   {"completeness_deviation", completeness},
                   {"bath_averaged_state", matrix_json(bath_avg)},
                   {"bath_averaged_trace", bath_avg.trace().real()},
                   {"subspace_average", matrix_json(subspace_average(red, HR, spec, cfg.tol).matrix())}};
  if (L.dS() == 2) {
    double worst = 0.0;
    for (const auto& p : red.bloch) worst = std::max(worst, std::abs(p.norm() - 1.0));
    j["max_unit_bloch_deviation"] = worst;
    ctx.summary.push_back("eigenstate Bloch vectors: max | |p_n| - 1 | = " + detail::short_fmt(worst));
  }
  if (eth) {
    long boundary = 0;
    double worst = 0.0;
    for (const auto& fit : fits) {
      boundary += fit->at_boundary ? 1 : 0;
      worst = std::max(worst, fit->residual);
    }
    j["eth_fits_at_boundary"] = boundary;
    j["eth_max_gibbs_distance"] = worst;
    ctx.summary.push_back("eth fit: " + std::to_string(boundary) + " of " + std::to_string(red.dim()) +
                          " eigenstates best fit at the beta bracket edge, max Gibbs distance " +
                          detail::short_fmt(worst));
  }
  detail::write_json(ctx.out / "equilibrium.json", j);
  ctx.summary.push_back("mean eigenstate purity = " + detail::short_fmt(red.purity.mean()) +
                        ", delta(psi x B_R, dR=" + std::to_string(dR) + ") = " + detail::short_fmt(d, 12));
}

inline std::vector<TheoremReport> stage_bounds(RunContext& ctx) {
  const auto& red = *ctx.red;
  const auto& L = ctx.model.layout;
  const auto& spec = ctx.model.spec;
  const auto& cfg = ctx.cfg;
  const auto& a = cfg.analysis;
  const PureState psi = system_state(cfg, L.dS());
  const long dR = bath_subspace_dim(cfg, L);
  const auto BR = SubspaceBasis::leading(L.dB(), dR, Space::bath);
  const auto HR = SubspaceBasis::system_times(psi, BR, L);
  const double d = delta(red, HR, spec);

  auto mc = [&](std::uint64_t salt) {
    return MonteCarloOptions{a.mc_samples, splitmix64(cfg.seed ^ (salt * 0x9E3779B97F4A7C15ULL)),
                             static_cast<int>(a.streams), ctx.jobs};
  };
  const NecessaryConditionOptions nc{a.nc_starts, 1e-8, splitmix64(cfg.seed + 11)};

  std::vector<std::pair<std::string, TheoremReport>> reports;
  if (detail::wants(cfg, TheoremId::T0i))
    reports.emplace_back("T0i", report_theorem0_i(L.dS(), dR, std::min(d, 1.0), theorem0_empirical_lhs(HR, spec, red, mc(1))));
  if (detail::wants(cfg, TheoremId::T0ii))
    reports.emplace_back("T0ii", report_theorem0_ii(L.dS(), dR, std::min(d, 1.0), a.epsilon,
                                                    theorem0_tail_frequency(HR, spec, red, a.epsilon, mc(2))));
  if (detail::wants(cfg, TheoremId::T1))
    reports.emplace_back("T1", report_necessary_condition(necessary_condition_lhs(red, spec, BR, nc), a.epsilon,
                                                          L.dS(), dR, a.p, true));
  std::optional<NecessaryConditionResult> t1p;
  if (detail::wants(cfg, TheoremId::T1prime)) {
    t1p = necessary_condition_lhs(red, nc);
    reports.emplace_back("T1prime", report_necessary_condition(*t1p, a.epsilon, L.dS(), L.dB(), a.p, false));
  }
  std::optional<Theorem2Lhs> t2;
  if (L.dS() == 2 && (detail::wants(cfg, TheoremId::T2i) || detail::wants(cfg, TheoremId::T2ii))) {
    t2 = theorem2_lhs(red);
    for (const auto id : {TheoremId::T2i, TheoremId::T2ii}) {
      if (!detail::wants(cfg, id)) continue;
      reports.emplace_back(to_string(id), report_theorem2(id, *t2, a.epsilon, 2, L.dB(), a.p));
      reports.emplace_back(std::string(to_string(id)) + "_target", report_theorem2_target(id, *t2, a.eps_prime_target));
    }
  }
  if (detail::wants(cfg, TheoremId::Popescu))
    reports.emplace_back("Popescu", report_popescu(L, a.epsilon, popescu_tail_frequency(L, a.epsilon, mc(3))));
  if (detail::wants(cfg, TheoremId::SufficientISI))
    reports.emplace_back("SufficientISI", sufficient_condition_report(d, a.sufficient_threshold));

  auto csv = detail::open_output(ctx.out / "theorems.csv");
  csv << "# schema_version: " << schema_version << "\n";
  csv << "report,theorem,lhs,rhs,verdict,vacuous\n";
  std::vector<TheoremReport> out;
  for (const auto& [name, r] : reports) {
    if (!report_self_consistent(r)) throw Error("report " + name + " is not reproducible from its parameters");
    detail::write_json(ctx.out / "reports" / (name + ".json"), report_to_json(r));
    csv << name << "," << to_string(r.id) << "," << detail::fmt(r.lhs) << "," << detail::fmt(r.rhs) << ","
        << to_string(r.verdict) << "," << (r.vacuous() ? "true" : "false") << "\n";
    ctx.summary.push_back(name + ": lhs = " + detail::short_fmt(r.lhs) + ", rhs = " + detail::short_fmt(r.rhs) +
                          " -> " + to_string(r.verdict) + (r.note.empty() ? "" : " (" + r.note + ")"));
    out.push_back(r);
  }

  ctx.summary.push_back("sufficient condition: sqrt(delta) = " + detail::short_fmt(std::sqrt(d)) + " vs threshold " +
                        detail::short_fmt(a.sufficient_threshold) + " -> " +
                        to_string(sufficient_condition_report(d, a.sufficient_threshold).verdict));
  if (t2) {
    ctx.summary.push_back("Theorem 2(ii) LHS = " + detail::short_fmt(t2->lhs_ii, 10) +
                          " (bound 3 eps' = " + detail::short_fmt(3.0 * a.eps_prime_target) + " at target eps' = " +
                          detail::short_fmt(a.eps_prime_target) + ")");
    ctx.summary.push_back("Theorem 2(i) LHS = " + detail::short_fmt(t2->lhs_i, 10) +
                          ", lambda_max(A) = " + detail::short_fmt(t2->lambda_max_A, 10));
    const double floor_accuracy = t2->lhs_ii / 3.0;
    const std::string shown = std::abs(t2->lhs_ii - 1.0) <= 1e-10 ? "1/3" : detail::short_fmt(floor_accuracy, 4);
    ctx.summary.push_back("conclusion: system ISI cannot hold with accuracy better than ≈ " + shown);
  }
  return out;
}

struct EquilibrationResult {
  std::vector<double> metric;
  double bound = 0.0;
  double T = 0.0;
  double mean() const {
    CompensatedSum s;
    for (double x : metric) s.add(x);
    return s.value() / static_cast<double>(metric.size());
  }
  double fraction_below() const {
    long k = 0;
    for (double x : metric) k += x <= bound ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(metric.size());
  }
};

/// ⟨‖ρ^S(t) − ρ̄^S‖⟩_t for Ψ(0) = ψ ⊗ Φ with Φ drawn uniformly from B_R.
inline EquilibrationResult equilibration_draws(const SpectralData& spec, const SpaceLayout& L, const PureState& psi,
                                               const SubspaceBasis& BR, double T_factor, long n_times, long draws,
                                               std::uint64_t seed, int jobs, const Tolerances& tol) {
  const auto levels = check_nondegenerate_spectrum(spec, tol.spectrum_rel);
  if (!levels.nondegenerate)
    throw DegenerateSpectrumError("equilibration: spectrum is degenerate", levels.level, levels.level + 1);
  EquilibrationResult r;
  r.T = T_factor / levels.min_level_spacing;
  r.bound = 2.0 * static_cast<double>(L.dS()) / std::sqrt(static_cast<double>(BR.dim()));
  r.metric.assign(draws, 0.0);
  const SubspaceBasis sys(psi.amplitudes(), Space::system);
  detail::parallel_for(draws, jobs, [&](long k) {
    RngStream state_rng(seed, 1000 + static_cast<std::uint64_t>(k));
    RngStream time_rng(seed, 500000 + static_cast<std::uint64_t>(k));
    const auto psi0 = sample_product_state(sys, BR, L, state_rng);
    r.metric[k] = equilibration_metric(overlaps(spec, psi0), spec, L, r.T, n_times, time_rng, tol);
  });
  return r;
}

inline void stage_dynamics(RunContext& ctx) {
  const auto& L = ctx.model.layout;
  const auto& spec = ctx.model.spec;
  const auto& cfg = ctx.cfg;
  const auto& dc = cfg.dynamics;
  const PureState psi = system_state(cfg, L.dS());
  const long dR = bath_subspace_dim(cfg, L);
  const auto BR = SubspaceBasis::leading(L.dB(), dR, Space::bath);

  // trajectory of the first draw on a uniform grid
  {
    RngStream state_rng(cfg.seed, 1000);
    const auto psi0 = sample_product_state(SubspaceBasis(psi.amplitudes(), Space::system), BR, L, state_rng);
    RVector times(dc.trajectory_points);
    for (long k = 0; k < dc.trajectory_points; ++k)
      times(k) = dc.trajectory_T * static_cast<double>(k) / static_cast<double>(dc.trajectory_points - 1);
    const auto traj = evolve_reduced(overlaps(spec, psi0), spec, L, times, EvolutionRoute::automatic, cfg.tol);
    auto f = detail::open_output(ctx.out / "trajectory.csv");
    f << "# schema_version: " << schema_version << "\n";
    f << "t,purity" << (L.dS() == 2 ? ",p_x,p_y,p_z" : "") << "\n";
    double min_purity = 1.0;
    for (long k = 0; k < times.size(); ++k) {
      const double pur = purity(traj.states[k]);
      min_purity = std::min(min_purity, pur);
      f << detail::fmt(times(k)) << "," << detail::fmt(pur);
      if (L.dS() == 2) {
        const auto p = bloch_vector(traj.states[k]);
        f << "," << detail::fmt(p.x) << "," << detail::fmt(p.y) << "," << detail::fmt(p.z);
      }
      f << "\n";
    }
    ctx.summary.push_back("trajectory: " + std::to_string(times.size()) + " points on [0, " +
                          detail::short_fmt(dc.trajectory_T) + "], minimum purity " + detail::short_fmt(min_purity));
  }

  const auto eq = equilibration_draws(spec, L, psi, BR, dc.T_factor, dc.n_times, dc.draws, cfg.seed, ctx.jobs, cfg.tol);
  auto f = detail::open_output(ctx.out / "equilibration.csv");
  f << "# schema_version: " << schema_version << "\n";
  f << "draw,T,metric,bound,within_bound\n";
  for (long k = 0; k < dc.draws; ++k)
    f << k << "," << detail::fmt(eq.T) << "," << detail::fmt(eq.metric[k]) << "," << detail::fmt(eq.bound) << ","
      << (eq.metric[k] <= eq.bound ? 1 : 0) << "\n";
  ctx.summary.push_back("equilibration (T = " + detail::short_fmt(eq.T) + ", " + std::to_string(dc.n_times) +
                        " times, " + std::to_string(dc.draws) + " draws): mean distance " +
                        detail::short_fmt(eq.mean()) + ", fraction within 2 dS/sqrt(dR) = " +
                        detail::short_fmt(eq.bound) + ": " + detail::short_fmt(eq.fraction_below()));
}

// ---------------------------------------------------------------------------
// Summary

inline void write_summary(const RunContext& ctx, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  auto f = detail::open_output(ctx.out / "summary.txt");
  f << "# isi-bench " << command << " '" << ctx.cfg.name << "'\n";
  f << "# generated " << stamp << "\n";
  for (const auto& line : ctx.summary) f << line << "\n";
}

// ---------------------------------------------------------------------------
// Parameter sweep

struct SweepRow {
  std::string value;
  double numeric = 0.0;
  long d = 0;
  double delta = 0.0;
  double mean_purity = 0.0;
  double lhs_ii = std::numeric_limits<double>::quiet_NaN();
  double lambda_max_A = std::numeric_limits<double>::quiet_NaN();
  double equilibration_mean = std::numeric_limits<double>::quiet_NaN();
  double within_bound = std::numeric_limits<double>::quiet_NaN();
};

/// One row per sweep value, averaged over `sweep.model_draws` models.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, int jobs, bool write_files = true) {
  validate(base);
  if (base.sweep.parameter.empty()) throw ConfigError("sweep.parameter is not set");
  const auto& values = base.sweep.values;
  std::vector<SweepRow> rows(values.size());
  const std::filesystem::path out(base.out);
  detail::parallel_for(static_cast<long>(values.size()), jobs, [&](long i) {
    ExperimentConfig cfg = base;
    apply_setting(cfg, base.sweep.parameter, values[i]);
    validate(cfg);
    SweepRow row;
    row.value = values[i];
    row.numeric = std::strtod(values[i].c_str(), nullptr);
    CompensatedSum delta_s, purity_s, lhs_s, lam_s, eq_s, within_s;
    const long draws = base.sweep.model_draws;
    bool spin_half = false;
    for (long j = 0; j < draws; ++j) {
      ExperimentConfig c = cfg;
      c.seed = splitmix64(base.seed * 1000003ULL + static_cast<std::uint64_t>(j));
      const BuiltModel m = build_model(c);
      const auto red = eigenstate_reductions(m.spec, m.layout, c.tol);
      if (!red.nondegenerate)
        throw DegenerateSpectrumError("sweep: degenerate spectrum", red.spacing_level, red.spacing_level + 1);
      const PureState psi = system_state(c, m.layout.dS());
      const long dR = bath_subspace_dim(c, m.layout);
      const auto BR = SubspaceBasis::leading(m.layout.dB(), dR, Space::bath);
      row.d = m.layout.d();
      delta_s.add(delta(red, SubspaceBasis::system_times(psi, BR, m.layout), m.spec));
      purity_s.add(red.purity.mean());
      if (m.layout.dS() == 2) {
        spin_half = true;
        const auto t2 = theorem2_lhs(red);
        lhs_s.add(t2.lhs_ii);
        lam_s.add(t2.lambda_max_A);
      }
      if (c.dynamics.enabled) {
        const auto eq = equilibration_draws(m.spec, m.layout, psi, BR, c.dynamics.T_factor, c.dynamics.n_times,
                                            c.dynamics.draws, c.seed, 1, c.tol);
        eq_s.add(eq.mean());
        within_s.add(eq.fraction_below());
      }
    }
    const double n = static_cast<double>(draws);
    row.delta = delta_s.value() / n;
    row.mean_purity = purity_s.value() / n;
    if (spin_half) {
      row.lhs_ii = lhs_s.value() / n;
      row.lambda_max_A = lam_s.value() / n;
    }
    if (cfg.dynamics.enabled) {
      row.equilibration_mean = eq_s.value() / n;
      row.within_bound = within_s.value() / n;
    }
    if (write_files) {
      nlohmann::json j{{"schema_version", schema_version}, {"parameter", base.sweep.parameter},
                       {"value", row.value},               {"d", row.d},
                       {"delta", row.delta},               {"mean_purity", row.mean_purity},
                       {"lhs_ii", detail::number(row.lhs_ii)},
                       {"lambda_max_A", detail::number(row.lambda_max_A)},
                       {"equilibration_mean", detail::number(row.equilibration_mean)},
                       {"within_bound", detail::number(row.within_bound)},
                       {"model_draws", draws}};
      detail::write_json(out / "points" / (base.sweep.parameter + "=" + row.value + ".json"), j);
    }
    rows[i] = row;
  });
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.numeric < b.numeric; });
  if (write_files) {
    auto f = detail::open_output(out / "sweep.csv");
    f << "# schema_version: " << schema_version << "\n";
    f << base.sweep.parameter << ",d,delta,mean_purity,lhs_ii,lambda_max_A,equilibration_mean,within_bound\n";
    auto cell = [](double x) { return std::isnan(x) ? std::string() : detail::fmt(x); };
    for (const auto& r : rows)
      f << r.value << "," << r.d << "," << detail::fmt(r.delta) << "," << detail::fmt(r.mean_purity) << ","
        << cell(r.lhs_ii) << "," << cell(r.lambda_max_A) << "," << cell(r.equilibration_mean) << ","
        << cell(r.within_bound) << "\n";
  }
  return rows;
}

}  // namespace isi
