#pragma once

// Core linear algebra on S ⊗ B: states, density matrices, partial traces,
// trace distance and qubit Bloch vectors.
//
// Layout contract shared by every module: the composite index is
// `i * dB + b` for system index i and bath index b (system slow).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "isi/errors.hpp"
#include "isi/tolerances.hpp"

namespace isi {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

enum class Space { system, bath, composite };

inline const char* to_string(Space s) {
  switch (s) {
    case Space::system: return "system";
    case Space::bath: return "bath";
    case Space::composite: return "composite";
  }
  return "unknown";
}

class SpaceLayout {
public:
  SpaceLayout(long dS, long dB) : dS_(dS), dB_(dB) {
    if (dS < 2) throw DimensionError("system dimension must be >= 2, got " + std::to_string(dS));
    if (dB < 1) throw DimensionError("bath dimension must be >= 1, got " + std::to_string(dB));
  }

  long dS() const noexcept { return dS_; }
  long dB() const noexcept { return dB_; }
  long d() const noexcept { return dS_ * dB_; }

  long dim(Space s) const noexcept {
    switch (s) {
      case Space::system: return dS_;
      case Space::bath: return dB_;
      case Space::composite: return d();
    }
    return 0;
  }

  bool operator==(const SpaceLayout&) const = default;

private:
  long dS_;
  long dB_;
};

/// Normalized state vector tagged with the factor it lives in.
class PureState {
public:
  PureState(CVector amplitudes, Space space, double tol = default_tolerances().state_norm)
      : amps_(std::move(amplitudes)), space_(space) {
    if (amps_.size() == 0) throw DimensionError("pure state with zero amplitudes");
    const double n = amps_.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > tol)
      throw InvalidStateError("pure state norm " + std::to_string(n) + " differs from 1");
  }

  /// Normalizes `v` first; throws only for a zero or non-finite vector.
  static PureState normalized(CVector v, Space space) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidStateError("cannot normalize a zero vector");
    v /= n;
    return PureState(std::move(v), space);
  }

  static PureState basis(long dim, long k, Space space) {
    if (k < 0 || k >= dim) throw DimensionError("basis index out of range");
    CVector v = CVector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v), space);
  }

  const CVector& amplitudes() const noexcept { return amps_; }
  Space space() const noexcept { return space_; }
  long dim() const noexcept { return amps_.size(); }

  CMatrix projector() const { return amps_ * amps_.adjoint(); }

private:
  CVector amps_;
  Space space_;
};

inline double max_hermitian_deviation(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityMatrix {
public:
  DensityMatrix(CMatrix m, Space space, const Tolerances& tol = default_tolerances())
      : m_(std::move(m)), space_(space) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DimensionError("density matrix must be square and non-empty");
    if (!m_.allFinite()) throw InvalidStateError("density matrix has non-finite entries");
    const double herm = max_hermitian_deviation(m_);
    if (herm > tol.hermitian)
      throw InvalidStateError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
    const cplx tr = m_.trace();
    if (std::abs(tr - 1.0) > tol.trace)
      throw InvalidStateError("density matrix trace " + std::to_string(tr.real()) + " differs from 1");
    const CMatrix h = 0.5 * (m_ + m_.adjoint());
    const double lowest = Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lowest < tol.psd)
      throw InvalidStateError("density matrix has negative eigenvalue " + std::to_string(lowest));
  }

  static DensityMatrix from_pure(const PureState& psi) {
    return DensityMatrix(psi.projector(), psi.space());
  }

  static DensityMatrix maximally_mixed(long dim, Space space) {
    return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim), space);
  }

  const CMatrix& matrix() const noexcept { return m_; }
  Space space() const noexcept { return space_; }
  long dim() const noexcept { return m_.rows(); }

private:
  CMatrix m_;
  Space space_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double squared_norm() const { return x * x + y * y + z * z; }
  double dot(const BlochVector& o) const { return x * o.x + y * o.y + z * o.z; }
  Eigen::Vector3d vec() const { return {x, y, z}; }
  static BlochVector from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

/// Kronecker product with the left factor as the slow index.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline PureState tensor_product(const PureState& psi, const PureState& phi, const SpaceLayout& layout) {
  if (psi.dim() != layout.dS() || phi.dim() != layout.dB())
    throw DimensionError("tensor_product: factor dimensions (" + std::to_string(psi.dim()) + ", " +
                         std::to_string(phi.dim()) + ") do not match layout (" +
                         std::to_string(layout.dS()) + ", " + std::to_string(layout.dB()) + ")");
  return PureState::normalized(kron(psi.amplitudes(), phi.amplitudes()), Space::composite);
}

namespace detail {
inline void require_composite(Eigen::Index n, const SpaceLayout& layout, const char* who) {
  if (n != layout.d())
    throw DimensionError(std::string(who) + ": composite dimension " + std::to_string(n) +
                         " does not match layout d = " + std::to_string(layout.d()));
}
}  // namespace detail

/// tr_B |a⟩⟨b| for composite vectors a, b. Used for ρ^S_{nm}.
inline CMatrix partial_trace_bath(const CVector& a, const CVector& b, const SpaceLayout& layout) {
  detail::require_composite(a.size(), layout, "partial_trace_bath");
  detail::require_composite(b.size(), layout, "partial_trace_bath");
  Eigen::Map<const CMatrix> ma(a.data(), layout.dB(), layout.dS());
  Eigen::Map<const CMatrix> mb(b.data(), layout.dB(), layout.dS());
  return ma.transpose() * mb.conjugate();
}

/// Partial trace over the bath of an arbitrary d×d operator.
inline CMatrix partial_trace_bath(const CMatrix& x, const SpaceLayout& layout) {
  detail::require_composite(x.rows(), layout, "partial_trace_bath");
  detail::require_composite(x.cols(), layout, "partial_trace_bath");
  const long dS = layout.dS(), dB = layout.dB();
  CMatrix out(dS, dS);
  for (long i = 0; i < dS; ++i)
    for (long j = 0; j < dS; ++j) out(i, j) = x.block(i * dB, j * dB, dB, dB).trace();
  return out;
}

/// Partial trace over the system of an arbitrary d×d operator.
inline CMatrix partial_trace_system(const CMatrix& x, const SpaceLayout& layout) {
  detail::require_composite(x.rows(), layout, "partial_trace_system");
  detail::require_composite(x.cols(), layout, "partial_trace_system");
  const long dS = layout.dS(), dB = layout.dB();
  CMatrix out = CMatrix::Zero(dB, dB);
  for (long i = 0; i < dS; ++i) out += x.block(i * dB, i * dB, dB, dB);
  return out;
}

inline DensityMatrix partial_trace_bath(const PureState& psi, const SpaceLayout& layout) {
  const CVector& a = psi.amplitudes();
  return DensityMatrix(partial_trace_bath(a, a, layout), Space::system);
}

inline DensityMatrix partial_trace_system(const PureState& psi, const SpaceLayout& layout) {
  detail::require_composite(psi.dim(), layout, "partial_trace_system");
  Eigen::Map<const CMatrix> m(psi.amplitudes().data(), layout.dB(), layout.dS());
  return DensityMatrix(m * m.adjoint(), Space::bath);
}

inline DensityMatrix partial_trace_bath(const DensityMatrix& rho, const SpaceLayout& layout) {
  return DensityMatrix(partial_trace_bath(rho.matrix(), layout), Space::system);
}

inline DensityMatrix partial_trace_system(const DensityMatrix& rho, const SpaceLayout& layout) {
  return DensityMatrix(partial_trace_system(rho.matrix(), layout), Space::bath);
}

/// Sum of absolute eigenvalues of the Hermitian part of `diff`.
inline double trace_norm_hermitian(const CMatrix& diff) {
  if (diff.rows() == 2) {
    // closed form for 2×2: eigenvalues t/2 ± sqrt((a−d)²/4 + |b|²)
    const double a = diff(0, 0).real(), d = diff(1, 1).real();
    const double b2 = std::norm(0.5 * (diff(0, 1) + std::conj(diff(1, 0))));
    const double half_tr = 0.5 * (a + d);
    const double r = std::sqrt(0.25 * (a - d) * (a - d) + b2);
    return std::abs(half_tr + r) + std::abs(half_tr - r);
  }
  const CMatrix h = 0.5 * (diff + diff.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
}

/// ‖ρ1 − ρ2‖ = tr√((ρ1 − ρ2)²), in [0, 2].
inline double trace_distance(const CMatrix& rho1, const CMatrix& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw DimensionError("trace_distance: dimension mismatch");
  return trace_norm_hermitian(rho1 - rho2);
}

inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return trace_distance(rho1.matrix(), rho2.matrix());
}

inline double purity(const CMatrix& rho) {
  // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
  return rho.cwiseAbs2().sum();
}

inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

inline std::array<CMatrix, 3> pauli_matrices() {
  CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  sy << 0.0, -I_unit, I_unit, 0.0;
  sz << 1.0, 0.0, 0.0, -1.0;
  return {sx, sy, sz};
}

/// p = tr(ρσ) for a 2×2 matrix (no validation).
inline BlochVector bloch_vector(const CMatrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) throw DimensionError("bloch_vector requires a 2x2 matrix");
  const cplx off = 0.5 * (rho(0, 1) + std::conj(rho(1, 0)));
  return {2.0 * off.real(), -2.0 * off.imag(), (rho(0, 0) - rho(1, 1)).real()};
}

inline BlochVector bloch_vector(const DensityMatrix& rho) { return bloch_vector(rho.matrix()); }

inline CMatrix bloch_matrix(const BlochVector& p) {
  CMatrix m(2, 2);
  m << 0.5 * (1.0 + p.z), 0.5 * cplx(p.x, -p.y), 0.5 * cplx(p.x, p.y), 0.5 * (1.0 - p.z);
  return m;
}

inline DensityMatrix density_from_bloch(const BlochVector& p, const Tolerances& tol = default_tolerances()) {
  const double n = p.norm();
  if (!std::isfinite(n) || n > 1.0 + tol.bloch_length)
    throw InvalidStateError("Bloch vector length " + std::to_string(n) + " exceeds 1");
  return DensityMatrix(bloch_matrix(p), Space::system, tol);
}

}  // namespace isi
