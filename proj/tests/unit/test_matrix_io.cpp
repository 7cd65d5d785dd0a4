#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "isi/matrix_io.hpp"
#include "isi/models.hpp"
#include "oracles.hpp"

using namespace isi;

TEST_CASE("Hamiltonian files survive a write/read cycle exactly", "[matrix_io]") {
  RngStream rng(3);
  const auto h = build_random_model(2, 3, 0.8, rng);
  std::stringstream buf;
  write_hamiltonian(buf, h);
  const auto back = read_hamiltonian(buf);
  CHECK(back.layout == h.layout);
  CHECK(back.HS == h.HS);
  CHECK(back.HB == h.HB);
  CHECK(back.HSB == h.HSB);
  CHECK(back.H == h.H);
}

TEST_CASE("single matrix format", "[matrix_io]") {
  const std::string text =
      "# a comment\n"
      "isi-matrix 1\n"
      "name X\n"
      "shape 2 2\n"
      "layout system 2 1\n"
      "0 0 1 0\n"
      "1 0 0 0\n"
      "end\n";
  std::istringstream in(text);
  const auto m = read_matrix(in);
  CHECK(m.name == "X");
  CHECK(m.space == Space::system);
  CHECK(m.matrix == pauli_matrices()[0]);

  std::ostringstream out;
  write_matrix(out, m);
  CHECK(out.str().find("shape 2 2") != std::string::npos);
  CHECK(out.str().find("layout system 2 1") != std::string::npos);
}

TEST_CASE("malformed files report the offending line", "[matrix_io]") {
  const std::string text =
      "isi-hamiltonian 1\n"
      "layout composite 2 1\n"
      "isi-matrix 1\n"
      "name HS\n"
      "shape 2 2\n"
      "layout system 2 1\n"
      "1 0 0 0\n"
      "0 0 oops\n"
      "end\n";
  std::istringstream in(text);
  try {
    read_hamiltonian(in);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 8);
  }

  std::istringstream missing("isi-hamiltonian 1\nlayout composite 2 1\n");
  CHECK_THROWS_AS(read_hamiltonian(missing), ConfigError);

  std::istringstream wrong("isi-hamiltonian 2\n");
  CHECK_THROWS_AS(read_hamiltonian(wrong), ConfigError);
}
