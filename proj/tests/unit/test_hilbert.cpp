#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "isi/hilbert.hpp"
#include "oracles.hpp"

using namespace isi;
using Catch::Approx;

namespace {

PureState state(std::initializer_list<cplx> amps, Space s) {
  CVector v(static_cast<long>(amps.size()));
  long k = 0;
  for (auto a : amps) v(k++) = a;
  return PureState::normalized(v, s);
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("layout invariants", "[hilbert]") {
  const SpaceLayout L(2, 8);
  CHECK(L.d() == 16);
  CHECK(L.dim(Space::bath) == 8);
  CHECK_THROWS_AS(SpaceLayout(1, 4), DimensionError);
  CHECK_THROWS_AS(SpaceLayout(2, 0), DimensionError);
}

TEST_CASE("pure state normalization is enforced", "[hilbert]") {
  CVector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(PureState(v, Space::system), InvalidStateError);
  CHECK_NOTHROW(PureState::normalized(v, Space::system));
  CHECK_THROWS_AS(PureState::normalized(CVector::Zero(3), Space::system), InvalidStateError);
}

TEST_CASE("tensor product layout", "[hilbert]") {
  const SpaceLayout L(2, 2);
  const auto up = PureState::basis(2, 0, Space::system);
  const auto down = PureState::basis(2, 1, Space::bath);

  SECTION("basis products") {
    CHECK(tensor_product(up, PureState::basis(2, 0, Space::bath), L).amplitudes().isApprox(
        CVector::Unit(4, 0)));
    CHECK(tensor_product(up, down, L).amplitudes().isApprox(CVector::Unit(4, 1)));
  }

  SECTION("superposition expands by hand") {
    const auto psi = state({1.0, 1.0}, Space::system);
    const auto phi = state({1.0, I_unit}, Space::bath);
    CVector expected(4);
    expected << 0.5, 0.5 * I_unit, 0.5, 0.5 * I_unit;
    CHECK(max_abs(tensor_product(psi, phi, L).amplitudes() - expected) < 1e-15);
  }

  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(tensor_product(up, PureState::basis(3, 0, Space::bath), L), DimensionError);
  }
}

TEST_CASE("partial traces", "[hilbert]") {
  SECTION("maximally entangled pair") {
    const SpaceLayout L(2, 2);
    const auto bell = state({1.0, 0.0, 0.0, 1.0}, Space::composite);
    const CMatrix half = CMatrix::Identity(2, 2) / 2.0;
    CHECK(max_abs(partial_trace_bath(bell, L).matrix() - half) < 1e-15);
    CHECK(max_abs(partial_trace_system(bell, L).matrix() - half) < 1e-15);
  }

  SECTION("product states reduce to their factors") {
    const SpaceLayout L(3, 4);
    const auto psi = PureState::normalized(oracle::random_unit(3, 1), Space::system);
    const auto phi = PureState::normalized(oracle::random_unit(4, 2), Space::bath);
    const auto prod = tensor_product(psi, phi, L);
    CHECK(max_abs(partial_trace_bath(prod, L).matrix() - psi.projector()) < 1e-14);
    CHECK(max_abs(partial_trace_system(prod, L).matrix() - phi.projector()) < 1e-14);
  }

  SECTION("random state against index-loop oracle") {
    const SpaceLayout L(2, 4);
    const auto Psi = PureState::normalized(oracle::random_unit(8, 42), Space::composite);
    const CMatrix rho = Psi.projector();
    CHECK(max_abs(partial_trace_bath(Psi, L).matrix() - oracle::partial_trace_bath_loops(rho, 2, 4)) < 1e-12);
    CHECK(max_abs(partial_trace_system(Psi, L).matrix() - oracle::partial_trace_system_loops(rho, 2, 4)) < 1e-12);
    CHECK(max_abs(partial_trace_bath(rho, L) - oracle::partial_trace_bath_loops(rho, 2, 4)) < 1e-12);
  }

  SECTION("partial traces of mixed states are valid density matrices") {
    const SpaceLayout L(3, 5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const DensityMatrix rho(oracle::random_density(15, 4, seed), Space::composite);
      CHECK_NOTHROW(partial_trace_bath(rho, L));
      CHECK_NOTHROW(partial_trace_system(rho, L));
    }
  }

  SECTION("trace preservation for arbitrary Hermitian operators") {
    const SpaceLayout L(2, 6);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CMatrix X = oracle::random_hermitian(12, seed);
      CHECK(std::abs(partial_trace_bath(X, L).trace() - X.trace()) < 1e-12);
      CHECK(std::abs(partial_trace_system(X, L).trace() - X.trace()) < 1e-12);
    }
  }

  SECTION("layout mismatch") {
    const SpaceLayout L(2, 3);
    CHECK_THROWS_AS(partial_trace_bath(CMatrix::Identity(4, 4), L), DimensionError);
  }
}

TEST_CASE("density matrix invariants", "[hilbert]") {
  CMatrix m(2, 2);
  m << 0.5, 0.1, 0.2, 0.5;
  CHECK_THROWS_AS(DensityMatrix(m, Space::system), InvalidStateError);  // not Hermitian
  m << 0.6, 0.0, 0.0, 0.6;
  CHECK_THROWS_AS(DensityMatrix(m, Space::system), InvalidStateError);  // trace
  m << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS_AS(DensityMatrix(m, Space::system), InvalidStateError);  // negative eigenvalue
}

TEST_CASE("trace distance", "[hilbert]") {
  CMatrix up = CMatrix::Zero(2, 2), down = CMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  down(1, 1) = 1.0;
  CHECK(trace_distance(up, down) == Approx(2.0).margin(1e-15));
  CHECK(trace_distance(up, up) == 0.0);

  // Bloch vectors (1,0,0) and (0,1,0) sit √2 apart
  const auto a = density_from_bloch({1.0, 0.0, 0.0});
  const auto b = density_from_bloch({0.0, 1.0, 0.0});
  CHECK(trace_distance(a, b) == Approx(std::sqrt(2.0)).margin(1e-14));

  CHECK_THROWS_AS(trace_distance(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)), DimensionError);

  SECTION("metric properties on random triples") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const CMatrix r1 = oracle::random_density(4, 2, 3 * s);
      const CMatrix r2 = oracle::random_density(4, 3, 3 * s + 1);
      const CMatrix r3 = oracle::random_density(4, 1, 3 * s + 2);
      CHECK(trace_distance(r1, r2) == trace_distance(r2, r1));
      CHECK(trace_distance(r1, r3) <= trace_distance(r1, r2) + trace_distance(r2, r3) + 1e-10);
      CHECK(trace_distance(r1, r2) <= 2.0 + 1e-12);
    }
  }

  SECTION("qubit distance equals Euclidean Bloch distance") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const CMatrix r1 = oracle::random_density(2, 2, 5 * s);
      const CMatrix r2 = oracle::random_density(2, 1, 5 * s + 1);
      const double euclid = (bloch_vector(r1).vec() - bloch_vector(r2).vec()).norm();
      CHECK(std::abs(trace_distance(r1, r2) - euclid) < 1e-10);
      // the 2×2 closed form agrees with the general eigenvalue route
      const CMatrix diff = r1 - r2;
      const double general =
          Eigen::SelfAdjointEigenSolver<CMatrix>(diff, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
      CHECK(std::abs(trace_distance(r1, r2) - general) < 1e-13);
    }
  }
}

TEST_CASE("purity", "[hilbert]") {
  const auto psi = PureState::normalized(oracle::random_unit(3, 9), Space::system);
  CHECK(purity(DensityMatrix::from_pure(psi)) == Approx(1.0).margin(1e-14));
  CHECK(purity(DensityMatrix::maximally_mixed(4, Space::system)) == Approx(0.25).margin(1e-15));
  // (1 + |p|²)/2 with |p| = 0.6
  CHECK(purity(density_from_bloch({0.0, 0.36, 0.48})) == Approx(0.68).margin(1e-14));
}

TEST_CASE("Bloch vectors", "[hilbert]") {
  const auto mixed = DensityMatrix::maximally_mixed(2, Space::system);
  CHECK(bloch_vector(mixed).norm() == 0.0);

  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 0) = 1.0;
  const auto p = bloch_vector(up);
  CHECK(p.x == 0.0);
  CHECK(p.y == 0.0);
  CHECK(p.z == 1.0);

  const BlochVector q{0.3, -0.4, 0.5};
  const auto back = bloch_vector(density_from_bloch(q));
  CHECK(std::abs(back.x - q.x) < 1e-14);
  CHECK(std::abs(back.y - q.y) < 1e-14);
  CHECK(std::abs(back.z - q.z) < 1e-14);

  CHECK_THROWS_AS(density_from_bloch({1.0, 1.0, 0.0}), InvalidStateError);
  CHECK_THROWS_AS(bloch_vector(CMatrix::Identity(3, 3)), DimensionError);

  SECTION("round trip from matrices") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const CMatrix r = oracle::random_density(2, 2, s);
      CHECK(max_abs(density_from_bloch(bloch_vector(r)).matrix() - r) < 1e-12);
    }
  }
}
