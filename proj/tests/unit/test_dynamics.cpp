#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "isi/dynamics.hpp"
#include "isi/models.hpp"
#include "oracles.hpp"

using namespace isi;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

struct Setup {
  CompositeHamiltonian h;
  SpectralData spec;
  PureState psi0;
  OverlapCoefficients c;
};

Setup random_setup(long dS, long dB, std::uint64_t seed) {
  RngStream rng(seed);
  auto h = build_random_model(dS, dB, 1.0, rng);
  auto spec = eigendecompose(h);
  auto psi0 = tensor_product(PureState::normalized(oracle::random_unit(dS, seed + 1), Space::system),
                             PureState::normalized(oracle::random_unit(dB, seed + 2), Space::bath), h.layout);
  auto c = overlaps(spec, psi0);
  return {std::move(h), std::move(spec), std::move(psi0), std::move(c)};
}

}  // namespace

TEST_CASE("stratified times", "[dynamics]") {
  RngStream rng(1);
  const RVector t = stratified_times(10.0, 50, rng);
  for (long k = 0; k < 50; ++k) {
    CHECK(t(k) >= 0.2 * k);
    CHECK(t(k) < 0.2 * (k + 1));
  }
  CHECK_THROWS_AS(stratified_times(0.0, 10, rng), InvalidArgumentError);
  CHECK_THROWS_AS(stratified_times(1.0, 0, rng), InvalidArgumentError);
}

TEST_CASE("reduced evolution", "[dynamics]") {
  SECTION("free precession of a qubit") {
    const double omega = 1.3;
    const SpaceLayout L(2, 1);
    const auto h = assemble(0.5 * omega * pauli_matrices()[2], CMatrix::Zero(1, 1), CMatrix::Zero(2, 2), L);
    const auto spec = eigendecompose(h);
    CVector plus(2);
    plus << 1.0, 1.0;
    const auto c = overlaps(spec, PureState::normalized(plus, Space::composite));
    RVector times(5);
    times << 0.0, 0.4, 1.1, 2.7, 9.0;
    const auto traj = evolve_reduced(c, spec, L, times);
    for (long k = 0; k < times.size(); ++k) {
      const auto p = bloch_vector(traj.states[k]);
      CHECK(std::abs(p.x - std::cos(omega * times(k))) < 1e-12);
      CHECK(std::abs(p.y - std::sin(omega * times(k))) < 1e-12);
      CHECK(std::abs(p.z) < 1e-12);
    }
  }

  SECTION("t = 0 gives the initial reduced state") {
    const auto s = random_setup(2, 6, 10);
    const RVector t0 = RVector::Zero(1);
    const auto traj = evolve_reduced(s.c, s.spec, s.h.layout, t0);
    CHECK(max_abs(traj.states[0].matrix() - partial_trace_bath(s.psi0, s.h.layout).matrix()) < 1e-12);
  }

  SECTION("agrees with the matrix exponential") {
    const auto s = random_setup(3, 4, 20);
    RVector times(4);
    times << 0.3, 1.7, 5.0, 13.0;
    const auto traj = evolve_reduced(s.c, s.spec, s.h.layout, times);
    for (long k = 0; k < times.size(); ++k) {
      const CMatrix U = (CMatrix(-I_unit * times(k) * s.h.H)).exp();
      const CVector psi = U * s.psi0.amplitudes();
      const CMatrix expected = oracle::partial_trace_bath_loops(psi * psi.adjoint(), 3, 4);
      CHECK(max_abs(traj.states[k].matrix() - expected) < 1e-10);
    }
  }

  SECTION("both routes agree") {
    const auto s = random_setup(2, 8, 30);
    RngStream rng(31);
    const RVector times = stratified_times(50.0, 300, rng);
    const auto a = evolve_reduced(s.c, s.spec, s.h.layout, times, EvolutionRoute::state_vector);
    const auto b = evolve_reduced(s.c, s.spec, s.h.layout, times, EvolutionRoute::pair_cache);
    double worst = 0.0;
    for (long k = 0; k < times.size(); ++k) worst = std::max(worst, max_abs(a.states[k].matrix() - b.states[k].matrix()));
    CHECK(worst < 1e-12);
  }

  SECTION("sparse eigenvectors of the commuting model take the same path") {
    RngStream rng(40);
    const auto spec_model = random_commuting_spec(32, 1.0, 1.0, 1.0, rng);
    const auto analytic = analytic_eigensystem(spec_model);
    const auto dense = eigendecompose(build_commuting_model(spec_model));
    const SpaceLayout L(2, 32);
    const auto psi0 = tensor_product(PureState::basis(2, 0, Space::system),
                                     PureState::normalized(oracle::random_unit(32, 41), Space::bath), L);
    RngStream tr(42);
    const RVector times = stratified_times(100.0, 200, tr);
    const auto a = evolve_reduced(overlaps(analytic, psi0), analytic, L, times);
    const auto b = evolve_reduced(overlaps(dense, psi0), dense, L, times);
    double worst = 0.0;
    for (long k = 0; k < times.size(); ++k) worst = std::max(worst, max_abs(a.states[k].matrix() - b.states[k].matrix()));
    CHECK(worst < 1e-9);
  }

  SECTION("an eigenstate is stationary") {
    const auto s = random_setup(2, 4, 50);
    const auto c = overlaps(s.spec, PureState(s.spec.eigenvectors.col(2), Space::composite));
    RngStream rng(51);
    const RVector times = stratified_times(20.0, 40, rng);
    const auto traj = evolve_reduced(c, s.spec, s.h.layout, times);
    for (const auto& r : traj.states) CHECK(max_abs(r.matrix() - traj.states[0].matrix()) < 1e-12);
  }

  SECTION("pair cache cap") {
    const auto s = random_setup(2, 4, 60);
    Tolerances tol;
    tol.pair_cache_max_dim = 4;
    CHECK_THROWS_AS(evolve_reduced(s.c, s.spec, s.h.layout, RVector::Zero(1), EvolutionRoute::pair_cache, tol),
                    CapExceededError);
  }
}

TEST_CASE("time averages", "[dynamics]") {
  const auto s = random_setup(2, 4, 70);
  const SpaceLayout& L = s.h.layout;
  const CMatrix rho_bar = time_average_from_spectrum(s.c, s.spec, L);
  CHECK(std::abs(rho_bar.trace().real() - 1.0) < 1e-12);

  SECTION("finite-time average approaches the infinite-time one as 1/T") {
    // |(1/T)∫₀ᵀ e^{−iΔt} dt| ≤ 2/(|Δ|T) bounds every off-diagonal term
    double bound_coeff = 0.0;
    for (long n = 0; n < s.spec.dim(); ++n)
      for (long m = 0; m < s.spec.dim(); ++m) {
        if (n == m) continue;
        const CMatrix pair = pair_reduction(s.spec, L, n, m);
        const double norm1 = Eigen::JacobiSVD<CMatrix>(pair).singularValues().sum();
        bound_coeff += std::abs(s.c.c(n) * s.c.c(m)) * norm1 * 2.0 / std::abs(s.spec.eigenvalues(n) - s.spec.eigenvalues(m));
      }
    double previous = 1e300;
    for (double T : {10.0, 100.0, 1000.0}) {
      RngStream rng(71);
      const auto avg = finite_time_average(s.c, s.spec, L, T, 200000, rng);
      const double err = trace_distance(avg.matrix(), rho_bar);
      CHECK(err <= bound_coeff / T + 1e-6);
      CHECK(err < previous);
      previous = err;
    }
  }

  SECTION("trajectory mean equals the streamed mean") {
    RngStream r1(80), r2(80);
    const RVector times = stratified_times(30.0, 500, r1);
    const auto traj = evolve_reduced(s.c, s.spec, L, times);
    const auto a = finite_time_average(traj);
    const auto b = finite_time_average(s.c, s.spec, L, 30.0, 500, r2);
    CHECK(max_abs(a.matrix() - b.matrix()) < 1e-14);
  }
}

TEST_CASE("equilibration metric", "[dynamics]") {
  const auto s = random_setup(2, 8, 90);
  RngStream rng(91);
  const double m = equilibration_metric(s.c, s.spec, s.h.layout, 200.0, 1000, rng);
  CHECK(m > 0.0);
  CHECK(m <= 2.0);

  const auto eig = overlaps(s.spec, PureState(s.spec.eigenvectors.col(4), Space::composite));
  RngStream rng2(92);
  CHECK(equilibration_metric(eig, s.spec, s.h.layout, 200.0, 100, rng2) < 1e-12);

  CHECK_THROWS_AS(equilibration_metric(s.c, s.spec, s.h.layout, 200.0, 99, rng), InvalidArgumentError);

  const SpaceLayout L(2, 2);
  const auto hd = assemble(0.5 * pauli_matrices()[2], CMatrix::Zero(2, 2), CMatrix::Zero(4, 4), L);
  const auto sd = eigendecompose(hd);
  const auto cd = overlaps(sd, PureState::normalized(oracle::random_unit(4, 3), Space::composite));
  CHECK_THROWS_AS(equilibration_metric(cd, sd, L, 10.0, 100, rng), DegenerateSpectrumError);
}
