#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "isi/models.hpp"
#include "isi/spectral.hpp"
#include "oracles.hpp"

using namespace isi;

namespace {

CMatrix diag(std::initializer_list<double> xs) {
  RVector v(static_cast<long>(xs.size()));
  long k = 0;
  for (double x : xs) v(k++) = x;
  return v.cast<cplx>().asDiagonal();
}

SpectralData from_values(std::initializer_list<double> xs) {
  RVector v(static_cast<long>(xs.size()));
  long k = 0;
  for (double x : xs) v(k++) = x;
  return make_spectral_data(v, CMatrix::Identity(v.size(), v.size()));
}

}  // namespace

TEST_CASE("assemble", "[spectral]") {
  const auto sigma = pauli_matrices();

  SECTION("system only") {
    const auto h = assemble(0.5 * sigma[2], CMatrix::Zero(1, 1), CMatrix::Zero(2, 2), SpaceLayout(2, 1));
    CHECK((h.H - diag({0.5, -0.5})).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("bath energies repeat under the system-slow layout") {
    const auto h = assemble(CMatrix::Zero(2, 2), diag({0.0, 1.0}), CMatrix::Zero(4, 4), SpaceLayout(2, 2));
    CHECK((h.H - diag({0.0, 1.0, 0.0, 1.0})).cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("commuting model with two bath levels matches a hand-assembled matrix") {
    CommutingModelSpec spec;
    spec.omega = 1.0;
    spec.v.resize(2, 3);
    spec.v << 0.4, -0.2, 0.3, -0.5, 0.1, 0.2;
    spec.EB = Eigen::Vector2d(0.7, -0.3);
    const auto h = build_commuting_model(spec);
    CMatrix expected = CMatrix::Zero(4, 4);
    expected(0, 0) = 1.35;
    expected(1, 1) = 0.3;
    expected(2, 2) = 0.05;
    expected(3, 3) = -0.9;
    expected(0, 2) = cplx(0.2, 0.1);
    expected(2, 0) = cplx(0.2, -0.1);
    expected(1, 3) = cplx(-0.25, -0.05);
    expected(3, 1) = cplx(-0.25, 0.05);
    CHECK((h.H - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  SECTION("parts sum to the total") {
    RngStream rng(4);
    const auto h = build_random_model(3, 4, 0.7, rng);
    const CMatrix rebuilt = kron(h.HS, CMatrix::Identity(4, 4)) + kron(CMatrix::Identity(3, 3), h.HB) + h.HSB;
    CHECK((h.H - rebuilt).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("rejects non-Hermitian parts and mismatched sizes") {
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(assemble(bad, CMatrix::Zero(1, 1), CMatrix::Zero(2, 2), SpaceLayout(2, 1)), InvalidArgumentError);
    CHECK_THROWS_AS(assemble(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2), CMatrix::Zero(2, 2), SpaceLayout(2, 1)),
                    DimensionError);
  }
}

TEST_CASE("eigendecompose", "[spectral]") {
  SECTION("diagonal matrix") {
    const auto s = eigendecompose(diag({3.0, 1.0, 2.0}));
    CHECK(s.eigenvalues.isApprox(Eigen::Vector3d(1.0, 2.0, 3.0)));
    CMatrix perm = CMatrix::Zero(3, 3);
    perm(1, 0) = 1.0;
    perm(2, 1) = 1.0;
    perm(0, 2) = 1.0;
    CHECK((s.eigenvectors - perm).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("sigma_x with the phase convention") {
    const auto s = eigendecompose(pauli_matrices()[0]);
    CHECK(std::abs(s.eigenvalues(0) + 1.0) < 1e-15);
    CHECK(std::abs(s.eigenvalues(1) - 1.0) < 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(s.eigenvectors(0, 0) - r) < 1e-15);
    CHECK(std::abs(s.eigenvectors(1, 0) + r) < 1e-15);
    CHECK(std::abs(s.eigenvectors(0, 1) - r) < 1e-15);
    CHECK(std::abs(s.eigenvectors(1, 1) - r) < 1e-15);
  }

  SECTION("residual, unitarity and reconstruction on random Hermitian matrices") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const CMatrix H = oracle::random_hermitian(40, seed);
      const auto s = eigendecompose(H);
      const auto r = spectral_residuals(s, H);
      CHECK(r.max_residual <= 1e-9 * s.norm);
      CHECK(r.unitarity <= 1e-10);
      CHECK(r.reconstruction <= 1e-9 * s.norm);
      for (long n = 0; n + 1 < s.dim(); ++n) CHECK(s.eigenvalues(n) < s.eigenvalues(n + 1));
      // phase convention: the largest component is real and positive
      for (long n = 0; n < s.dim(); ++n) {
        Eigen::Index arg;
        s.eigenvectors.col(n).cwiseAbs().maxCoeff(&arg);
        CHECK(s.eigenvectors(arg, n).imag() == 0.0);
        CHECK(s.eigenvectors(arg, n).real() > 0.0);
      }
    }
  }

  SECTION("deterministic output") {
    const CMatrix H = oracle::random_hermitian(30, 12);
    const auto a = eigendecompose(H), b = eigendecompose(H);
    CHECK(a.eigenvectors == b.eigenvectors);
    CHECK(a.eigenvalues == b.eigenvalues);
  }

  SECTION("eigenvalues invariant under a bath basis change") {
    RngStream rng(8);
    const auto h = build_random_model(2, 6, 1.0, rng);
    const CMatrix Ub = eigendecompose(oracle::random_hermitian(6, 3)).eigenvectors;
    const CMatrix U = kron(CMatrix::Identity(2, 2), Ub);
    const auto a = eigendecompose(h.H), b = eigendecompose(CMatrix(U * h.H * U.adjoint()));
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
  }

  SECTION("cap and Hermiticity") {
    Tolerances tol;
    tol.decomposition_max_dim = 4;
    CHECK_THROWS_AS(eigendecompose(CMatrix::Identity(5, 5), tol), CapExceededError);
    CMatrix bad = CMatrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(eigendecompose(bad), InvalidArgumentError);
  }
}

TEST_CASE("spectrum degeneracy", "[spectral]") {
  auto s = eigendecompose(diag({0.0, 1.0, 2.0}));
  auto c = check_nondegenerate_spectrum(s, 1e-10);
  CHECK(c.nondegenerate);
  CHECK(c.min_level_spacing == 1.0);

  auto t = eigendecompose(diag({0.0, 0.0, 1.0}));
  CHECK_FALSE(check_nondegenerate_spectrum(t, 1e-10).nondegenerate);
}

TEST_CASE("gap degeneracy", "[spectral]") {
  SECTION("equally spaced spectrum repeats the gap 1") {
    auto s = from_values({0.0, 1.0, 2.0});
    CHECK_FALSE(check_nondegenerate_gaps(s).nondegenerate);
  }

  SECTION("0, 1, 3 has distinct gaps") {
    auto s = from_values({0.0, 1.0, 3.0});
    const auto c = check_nondegenerate_gaps(s);
    CHECK(c.nondegenerate);
    CHECK(c.n_gaps == 3);
    CHECK(c.min_gap_collision == 1.0);  // gaps {1, 2, 3}
    REQUIRE(s.min_gap_collision.has_value());
  }

  SECTION("0, 1, 2.5, 4 repeats 1.5") {
    // gaps: 1, 2.5, 4, 1.5, 3, 1.5
    auto s = from_values({0.0, 1.0, 2.5, 4.0});
    const auto c = check_nondegenerate_gaps(s);
    CHECK_FALSE(c.nondegenerate);
    CHECK(c.min_gap_collision == 0.0);
  }

  SECTION("degenerate pair of levels") {
    auto s = from_values({0.0, 0.0});
    CHECK_FALSE(check_nondegenerate_gaps(s).nondegenerate);
  }

  SECTION("commuting model with random couplings has nondegenerate gaps") {
    RngStream rng(99);
    const auto spec = random_commuting_spec(16, 1.0, 1.0, 1.0, rng);
    auto s = eigendecompose(build_commuting_model(spec));
    const auto c = check_nondegenerate_gaps(s);
    CHECK(c.nondegenerate);
    CHECK(c.min_gap_collision > 1e-9 * s.norm);
    CHECK(check_nondegenerate_spectrum(s, 1e-10).nondegenerate);
  }

  SECTION("cap") {
    auto s = from_values({0.0, 1.0, 3.0});
    CHECK_THROWS_AS(check_nondegenerate_gaps(s, 1e-9, 2), CapExceededError);
  }
}
