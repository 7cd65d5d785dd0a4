#pragma once

// Haar-uniform pure states on subspaces and seeded Monte Carlo averages.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "isi/errors.hpp"
#include "isi/hilbert.hpp"
#include "isi/tolerances.hpp"

namespace isi {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// One independent random stream: mt19937_64 keyed by (seed, stream id).
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(key(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  /// Independent child stream; does not advance this one.
  RngStream split(std::uint64_t child) const {
    return RngStream(splitmix64(seed_ ^ splitmix64(stream_ + 0x632BE59BD9B4E019ULL)), child);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::mt19937_64& engine() noexcept { return engine_; }

private:
  static std::uint64_t key(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ULL + 1));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Orthonormal columns spanning a subspace H_R of some factor space.
class SubspaceBasis {
public:
  SubspaceBasis(CMatrix columns, Space space, double tol = default_tolerances().orthonormal)
      : cols_(std::move(columns)), space_(space) {
    if (cols_.cols() == 0) throw DimensionError("subspace basis must have at least one column");
    if (cols_.rows() < cols_.cols()) throw DimensionError("subspace basis has more columns than rows");
    const double dev = (cols_.adjoint() * cols_ - CMatrix::Identity(cols_.cols(), cols_.cols()))
                           .cwiseAbs()
                           .maxCoeff();
    if (dev > tol)
      throw InvalidStateError("subspace basis columns not orthonormal (deviation " + std::to_string(dev) + ")");
  }

  static SubspaceBasis full(long dim, Space space) { return leading(dim, dim, space); }

  /// First `dR` computational basis vectors.
  static SubspaceBasis leading(long dim, long dR, Space space) {
    if (dR < 1 || dR > dim) throw DimensionError("leading subspace dimension out of range");
    return SubspaceBasis(CMatrix::Identity(dim, dR), space, Trusted{});
  }

  /// ψ ⊗ B_R as a subspace of the composite space.
  static SubspaceBasis system_times(const PureState& psi, const SubspaceBasis& bath, const SpaceLayout& layout) {
    if (psi.dim() != layout.dS() || bath.ambient_dim() != layout.dB())
      throw DimensionError("system_times: dimensions do not match layout");
    return SubspaceBasis(kron_columns(psi.amplitudes(), bath.columns(), true), Space::composite);
  }

  /// S_R ⊗ Φ as a subspace of the composite space.
  static SubspaceBasis times_bath(const SubspaceBasis& sys, const PureState& phi, const SpaceLayout& layout) {
    if (phi.dim() != layout.dB() || sys.ambient_dim() != layout.dS())
      throw DimensionError("times_bath: dimensions do not match layout");
    return SubspaceBasis(kron_columns(phi.amplitudes(), sys.columns(), false), Space::composite);
  }

  const CMatrix& columns() const noexcept { return cols_; }
  long dim() const noexcept { return cols_.cols(); }
  long ambient_dim() const noexcept { return cols_.rows(); }
  Space space() const noexcept { return space_; }

private:
  struct Trusted {};
  SubspaceBasis(CMatrix columns, Space space, Trusted) : cols_(std::move(columns)), space_(space) {}

  // fixed ⊗ column_k (fixed_left) or column_k ⊗ fixed
  static CMatrix kron_columns(const CVector& fixed, const CMatrix& cols, bool fixed_left) {
    CMatrix out(fixed.size() * cols.rows(), cols.cols());
    for (Eigen::Index k = 0; k < cols.cols(); ++k) {
      const CVector col = cols.col(k);
      out.col(k) = fixed_left ? kron(fixed, col) : kron(col, fixed);
    }
    return out;
  }

  CMatrix cols_;
  Space space_;
};

/// dR complex amplitudes from 2dR independent standard normals, normalized.
inline CVector sample_sphere_coordinates(long dR, RngStream& rng) {
  if (dR < 1) throw DimensionError("cannot sample from an empty subspace");
  CVector z(dR);
  for (long k = 0; k < dR; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    z(k) = cplx(re, im);
  }
  const double n = z.norm();
  if (!(n > 0.0)) return sample_sphere_coordinates(dR, rng);
  return z / n;
}

/// Uniformly distributed unit vector in span(basis).
inline PureState sample_uniform_state(const SubspaceBasis& basis, RngStream& rng) {
  return PureState::normalized(basis.columns() * sample_sphere_coordinates(basis.dim(), rng), basis.space());
}

inline PureState sample_product_state(const SubspaceBasis& sys_basis, const SubspaceBasis& bath_basis,
                                      const SpaceLayout& layout, RngStream& rng) {
  const PureState psi = sample_uniform_state(sys_basis, rng);
  const PureState phi = sample_uniform_state(bath_basis, rng);
  return tensor_product(psi, phi, layout);
}

/// Neumaier-compensated running sum over doubles.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  void merge(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }

  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Elementwise compensated sum of real matrices.
class CompensatedMatrixSum {
public:
  CompensatedMatrixSum() = default;
  CompensatedMatrixSum(Eigen::Index rows, Eigen::Index cols)
      : sum_(RMatrix::Zero(rows, cols)), comp_(RMatrix::Zero(rows, cols)) {}

  void add(const RMatrix& x) {
    if (sum_.size() == 0) {
      sum_ = RMatrix::Zero(x.rows(), x.cols());
      comp_ = RMatrix::Zero(x.rows(), x.cols());
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      double& s = sum_.data()[k];
      const double v = x.data()[k];
      const double t = s + v;
      if (std::abs(s) >= std::abs(v))
        comp_.data()[k] += (s - t) + v;
      else
        comp_.data()[k] += (v - t) + s;
      s = t;
    }
  }

  void merge(const CompensatedMatrixSum& o) {
    if (o.sum_.size() == 0) return;
    add(o.sum_);
    add(o.comp_);
  }

  RMatrix value() const { return sum_ + comp_; }
  bool empty() const { return sum_.size() == 0; }

private:
  RMatrix sum_;
  RMatrix comp_;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  int streams = 1;
};

/// Matrix-valued estimate with elementwise errors on real and imaginary parts.
struct MatrixEstimate {
  CMatrix mean;
  RMatrix se_real;
  RMatrix se_imag;
  /// Mean and standard error of ‖sample − mean‖ (trace distance).
  double mean_distance_to_mean = 0.0;
  double distance_standard_error = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  int streams = 1;

  /// True when every entry of `target` lies within k standard errors.
  bool within(const CMatrix& target, double k) const {
    for (Eigen::Index i = 0; i < mean.rows(); ++i)
      for (Eigen::Index j = 0; j < mean.cols(); ++j) {
        const cplx diff = mean(i, j) - target(i, j);
        if (std::abs(diff.real()) > k * se_real(i, j) + 1e-15) return false;
        if (std::abs(diff.imag()) > k * se_imag(i, j) + 1e-15) return false;
      }
    return true;
  }
};

struct MonteCarloOptions {
  long n_samples = 10000;
  std::uint64_t seed = 1;
  int streams = 1;  ///< number of independent RNG streams (part of the result's identity)
  int jobs = 1;     ///< threads; does not change the result
};

namespace detail {

inline void check_mc_options(const MonteCarloOptions& o) {
  if (o.n_samples < 2) throw InvalidArgumentError("Monte Carlo needs at least 2 samples");
  if (o.streams < 1) throw InvalidArgumentError("Monte Carlo needs at least 1 stream");
}

/// Runs body(stream_index, first_sample, count, rng) for each stream, using up to `jobs` threads.
template <class Body>
void for_each_stream(const MonteCarloOptions& o, Body&& body) {
  const long per = o.n_samples / o.streams;
  const long extra = o.n_samples % o.streams;
  auto run = [&](int s) {
    const long first = s * per + std::min<long>(s, extra);
    const long count = per + (s < extra ? 1 : 0);
    RngStream rng(o.seed, static_cast<std::uint64_t>(s));
    body(s, first, count, rng);
  };
  const int jobs = std::max(1, std::min(o.jobs, o.streams));
  if (jobs == 1) {
    for (int s = 0; s < o.streams; ++s) run(s);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (int s = w; s < o.streams; s += jobs) run(s);
    });
  for (auto& t : pool) t.join();
}

inline void require_finite(double v, long index) {
  if (!std::isfinite(v))
    throw NonFiniteError("Monte Carlo functional returned a non-finite value at sample " + std::to_string(index));
}

}  // namespace detail

/// Sample mean and standard error of a scalar functional.
///
/// `sampler(rng)` draws one sample, `functional(sample)` maps it to a double.
/// The result depends only on (seed, streams, n_samples).
template <class Sampler, class Functional>
MonteCarloEstimate monte_carlo_average(Functional&& functional, Sampler&& sampler, const MonteCarloOptions& opts) {
  detail::check_mc_options(opts);
  std::vector<CompensatedSum> sums(opts.streams), squares(opts.streams);
  detail::for_each_stream(opts, [&](int s, long first, long count, RngStream& rng) {
    for (long k = 0; k < count; ++k) {
      const double v = functional(sampler(rng));
      detail::require_finite(v, first + k);
      sums[s].add(v);
      squares[s].add(v * v);
    }
  });
  CompensatedSum total, total_sq;
  for (int s = 0; s < opts.streams; ++s) {
    total.merge(sums[s]);
    total_sq.merge(squares[s]);
  }
  const double n = static_cast<double>(opts.n_samples);
  const double mean = total.value() / n;
  const double var = std::max(0.0, (total_sq.value() - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), opts.n_samples, opts.seed, opts.streams};
}

/// Matrix-valued version; `functional(sample)` returns a complex matrix.
template <class Sampler, class Functional>
MatrixEstimate monte_carlo_matrix_average(Functional&& functional, Sampler&& sampler, const MonteCarloOptions& opts) {
  detail::check_mc_options(opts);
  std::vector<std::vector<CMatrix>> samples(opts.streams);
  detail::for_each_stream(opts, [&](int s, long first, long count, RngStream& rng) {
    samples[s].reserve(count);
    for (long k = 0; k < count; ++k) {
      CMatrix v = functional(sampler(rng));
      if (!v.allFinite())
        throw NonFiniteError("Monte Carlo functional returned a non-finite matrix at sample " +
                             std::to_string(first + k));
      samples[s].push_back(std::move(v));
    }
  });
  const Eigen::Index r = samples[0][0].rows(), c = samples[0][0].cols();
  CompensatedMatrixSum re(r, c), im(r, c), re2(r, c), im2(r, c);
  for (const auto& stream : samples)
    for (const auto& v : stream) {
      re.add(v.real());
      im.add(v.imag());
      re2.add(v.real().cwiseAbs2());
      im2.add(v.imag().cwiseAbs2());
    }
  const double n = static_cast<double>(opts.n_samples);
  MatrixEstimate est;
  const RMatrix mre = re.value() / n, mim = im.value() / n;
  est.mean = mre.cast<cplx>() + I_unit * mim.cast<cplx>();
  auto se = [&](const RMatrix& sq, const RMatrix& m) -> RMatrix {
    return ((sq - n * m.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(n);
  };
  est.se_real = se(re2.value(), mre);
  est.se_imag = se(im2.value(), mim);
  CompensatedSum dist, dist2;
  for (const auto& stream : samples)
    for (const auto& v : stream) {
      const double dv = trace_norm_hermitian(v - est.mean);
      dist.add(dv);
      dist2.add(dv * dv);
    }
  est.mean_distance_to_mean = dist.value() / n;
  const double dvar = std::max(0.0, (dist2.value() - n * est.mean_distance_to_mean * est.mean_distance_to_mean) / (n - 1.0));
  est.distance_standard_error = std::sqrt(dvar / n);
  est.n_samples = opts.n_samples;
  est.seed = opts.seed;
  est.streams = opts.streams;
  return est;
}

/// Kolmogorov–Smirnov statistic of `xs` against the uniform law on [0, 1].
inline double ks_statistic_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = std::clamp(xs[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Two-sample Kolmogorov–Smirnov statistic.
inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

}  // namespace isi
