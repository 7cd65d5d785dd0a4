#pragma once

// Text matrix format for Hamiltonians.
//
//   isi-matrix 1
//   name <identifier>
//   shape <rows> <cols>
//   layout <system|bath|composite> <dS> <dB>
//   <re> <im> <re> <im> ...      one line per row, row-major
//   end
//
// A Hamiltonian file is the header line `isi-hamiltonian 1` followed by a
// `layout composite <dS> <dB>` line and three matrix blocks named HS, HB, HSB.
// Lines starting with '#' and blank lines are ignored. Numbers are written
// with 17 significant digits so a write/read cycle is exact.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/spectral.hpp"

namespace isi {

struct NamedMatrix {
  std::string name;
  Space space = Space::composite;
  long dS = 0;
  long dB = 0;
  CMatrix matrix;
};

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Space parse_space(const std::string& s, int line) {
  if (s == "system") return Space::system;
  if (s == "bath") return Space::bath;
  if (s == "composite") return Space::composite;
  throw ConfigError("unknown layout tag '" + s + "'", line, 1);
}

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank, non-comment line; false at EOF.
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      const auto first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos || raw[first] == '#') continue;
      out = raw;
      return true;
    }
    return false;
  }

  std::string expect(const char* what) {
    std::string s;
    if (!next(s)) throw ConfigError(std::string("unexpected end of file, expected ") + what, line_ + 1, 1);
    return s;
  }

  int line() const noexcept { return line_; }

private:
  std::istream& in_;
  int line_ = 0;
};

inline NamedMatrix read_matrix_block(LineReader& r) {
  NamedMatrix m;
  std::string tag, word;
  long version = 0;
  {
    std::istringstream h(r.expect("'isi-matrix'"));
    if (!(h >> tag >> version) || tag != "isi-matrix" || version != 1)
      throw ConfigError("expected 'isi-matrix 1'", r.line(), 1);
  }
  {
    std::istringstream h(r.expect("'name'"));
    if (!(h >> word >> m.name) || word != "name") throw ConfigError("expected 'name <identifier>'", r.line(), 1);
  }
  long rows = 0, cols = 0;
  {
    std::istringstream h(r.expect("'shape'"));
    if (!(h >> word >> rows >> cols) || word != "shape" || rows < 1 || cols < 1)
      throw ConfigError("expected 'shape <rows> <cols>' with positive sizes", r.line(), 1);
  }
  {
    std::istringstream h(r.expect("'layout'"));
    std::string space;
    if (!(h >> word >> space >> m.dS >> m.dB) || word != "layout")
      throw ConfigError("expected 'layout <tag> <dS> <dB>'", r.line(), 1);
    m.space = parse_space(space, r.line());
  }
  m.matrix.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    std::istringstream row(r.expect("matrix row"));
    for (long j = 0; j < cols; ++j) {
      double re = 0, im = 0;
      if (!(row >> re >> im))
        throw ConfigError("row " + std::to_string(i) + ": expected " + std::to_string(cols) + " complex pairs",
                          r.line(), static_cast<int>(2 * j + 1));
      m.matrix(i, j) = cplx(re, im);
    }
    std::string extra;
    if (row >> extra) throw ConfigError("row " + std::to_string(i) + ": trailing data '" + extra + "'", r.line(), 1);
  }
  {
    std::istringstream h(r.expect("'end'"));
    if (!(h >> word) || word != "end") throw ConfigError("expected 'end'", r.line(), 1);
  }
  return m;
}

}  // namespace detail

inline void write_matrix(std::ostream& out, const NamedMatrix& m) {
  out << "isi-matrix 1\n";
  out << "name " << m.name << "\n";
  out << "shape " << m.matrix.rows() << " " << m.matrix.cols() << "\n";
  out << "layout " << to_string(m.space) << " " << m.dS << " " << m.dB << "\n";
  for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
      if (j) out << ' ';
      out << detail::fmt17(m.matrix(i, j).real()) << ' ' << detail::fmt17(m.matrix(i, j).imag());
    }
    out << '\n';
  }
  out << "end\n";
}

inline NamedMatrix read_matrix(std::istream& in) {
  detail::LineReader r(in);
  return detail::read_matrix_block(r);
}

inline void write_hamiltonian(std::ostream& out, const CompositeHamiltonian& h) {
  const SpaceLayout& L = h.layout;
  out << "isi-hamiltonian 1\n";
  out << "layout composite " << L.dS() << " " << L.dB() << "\n";
  write_matrix(out, {"HS", Space::system, L.dS(), L.dB(), h.HS});
  write_matrix(out, {"HB", Space::bath, L.dS(), L.dB(), h.HB});
  write_matrix(out, {"HSB", Space::composite, L.dS(), L.dB(), h.HSB});
}

inline CompositeHamiltonian read_hamiltonian(std::istream& in, const Tolerances& tol = default_tolerances()) {
  detail::LineReader r(in);
  std::string tag, word, space;
  long version = 0, dS = 0, dB = 0;
  {
    std::istringstream h(r.expect("'isi-hamiltonian'"));
    if (!(h >> tag >> version) || tag != "isi-hamiltonian" || version != 1)
      throw ConfigError("expected 'isi-hamiltonian 1'", r.line(), 1);
  }
  {
    std::istringstream h(r.expect("'layout'"));
    if (!(h >> word >> space >> dS >> dB) || word != "layout" || space != "composite")
      throw ConfigError("expected 'layout composite <dS> <dB>'", r.line(), 1);
  }
  const SpaceLayout layout(dS, dB);
  CMatrix HS, HB, HSB;
  bool seen[3] = {false, false, false};
  for (int k = 0; k < 3; ++k) {
    const int at = r.line() + 1;
    NamedMatrix m = detail::read_matrix_block(r);
    if (m.dS != dS || m.dB != dB) throw ConfigError("matrix '" + m.name + "' layout disagrees with file header", at, 1);
    if (m.name == "HS" && !seen[0]) {
      HS = std::move(m.matrix);
      seen[0] = true;
    } else if (m.name == "HB" && !seen[1]) {
      HB = std::move(m.matrix);
      seen[1] = true;
    } else if (m.name == "HSB" && !seen[2]) {
      HSB = std::move(m.matrix);
      seen[2] = true;
    } else {
      throw ConfigError("unexpected or duplicate matrix '" + m.name + "'", at, 1);
    }
  }
  return assemble(HS, HB, HSB, layout, tol);
}

inline CompositeHamiltonian load_hamiltonian(const std::string& path, const Tolerances& tol = default_tolerances()) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Hamiltonian file '" + path + "'");
  return read_hamiltonian(in, tol);
}

inline void save_hamiltonian(const std::string& path, const CompositeHamiltonian& h) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write Hamiltonian file '" + path + "'");
  write_hamiltonian(out, h);
}

}  // namespace isi
