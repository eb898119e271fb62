#pragma once

// Dense symmetric matrices and the spectral calculus built on them:
// cyclic Jacobi eigendecomposition, real matrix powers M^q = V diag(l^q) V',
// quadratic forms and extreme eigenvalues.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "optdes/errors.hpp"

namespace optdes {

class SymMatrix {
 public:
  explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
    if (dim == 0) throw InputError("SymMatrix: dimension must be at least 1");
  }

  static SymMatrix identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.a_[i * dim + i] = 1.0;
    return m;
  }

  static SymMatrix diagonal(std::span<const double> d) {
    SymMatrix m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
    return m;
  }
  static SymMatrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }

  // Builds from a full row-major square array. The two triangles must agree
  // to rounding; they are averaged so that the result is exactly symmetric.
  static SymMatrix from_dense(std::size_t dim, std::span<const double> rowmajor) {
    if (rowmajor.size() != dim * dim)
      throw InputError("SymMatrix: expected " + std::to_string(dim * dim) + " entries, got " +
                       std::to_string(rowmajor.size()));
    SymMatrix m(dim);
    double scale = 1.0;
    for (double v : rowmajor) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = i; j < dim; ++j) {
        const double u = rowmajor[i * dim + j];
        const double l = rowmajor[j * dim + i];
        if (std::abs(u - l) > 1e-12 * scale)
          throw InputError("SymMatrix: input is not symmetric at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")");
        m.set(i, j, i == j ? u : 0.5 * (u + l));
      }
    }
    return m;
  }

  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& r : rows) {
      if (r.size() != n) throw InputError("SymMatrix: rows must form a square array");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return from_dense(n, flat);
  }

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return a_; }

  void set(std::size_t i, std::size_t j, double v) noexcept {
    a_[i * dim_ + j] = v;
    a_[j * dim_ + i] = v;
  }

  // M += w * x x'
  void add_outer(std::span<const double> x, double w) {
    if (x.size() != dim_) throw InputError("SymMatrix::add_outer: dimension mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
      const double wxi = w * x[i];
      for (std::size_t j = i; j < dim_; ++j) a_[i * dim_ + j] += wxi * x[j];
    }
    mirror_upper();
  }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same_dim(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same_dim(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  SymMatrix& operator*=(double s) noexcept {
    for (double& v : a_) v *= s;
    return *this;
  }
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

  double max_abs() const noexcept {
    double r = 0.0;
    for (double v : a_) r = std::max(r, std::abs(v));
    return r;
  }
  double frobenius_norm() const noexcept {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }
  bool all_finite() const noexcept {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  void mirror_upper() noexcept {
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j) a_[j * dim_ + i] = a_[i * dim_ + j];
  }
  void check_same_dim(const SymMatrix& o) const {
    if (o.dim_ != dim_) throw InputError("SymMatrix: dimension mismatch");
  }

  std::size_t dim_;
  std::vector<double> a_;
};

//! tr(A B) for symmetric A, B.
inline double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw InputError("frobenius_inner: dimension mismatch");
  const auto x = a.data();
  const auto y = b.data();
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

inline double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw InputError("max_abs_diff: dimension mismatch");
  double r = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    r = std::max(r, std::abs(a.data()[k] - b.data()[k]));
  return r;
}

//! Eigenvalues ascending; eigenvector k is column k of the row-major `vectors` array.
struct SpectralDecomp {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<double> vectors;

  double vec(std::size_t row, std::size_t col) const noexcept { return vectors[row * dim + col]; }
  double min() const noexcept { return values.front(); }
  double max() const noexcept { return values.back(); }
};

namespace detail {
inline constexpr double kJacobiRelTol = 1e-13;
inline constexpr int kJacobiMaxSweeps = 100;
}  // namespace detail

// Cyclic Jacobi: sweeps over (p,q), p < q, in row order until the
// off-diagonal Frobenius norm is below 1e-13 ||M||_F.
inline SpectralDecomp sym_eig(const SymMatrix& m) {
  if (!m.all_finite()) throw InputError("sym_eig: matrix has non-finite entries");
  const std::size_t n = m.dim();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double tol = detail::kJacobiRelTol * m.frobenius_norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < detail::kJacobiMaxSweeps && off_norm() > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

  SpectralDecomp out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a[order[k] * n + order[k]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + k] = v[i * n + order[k]];
  }
  return out;
}

//! Eigenvalues below this are treated as zero for negative or fractional powers.
inline double pd_threshold(const SpectralDecomp& d) noexcept {
  return 1e-10 * std::max(d.max(), 1.0);
}

inline bool is_positive_definite(const SpectralDecomp& d) noexcept {
  return d.min() > pd_threshold(d);
}

//! V diag(f(l)) V' as an exactly symmetric matrix.
template <class Fn>
SymMatrix spectral_apply(const SpectralDecomp& d, Fn&& f) {
  const std::size_t n = d.dim;
  std::vector<double> fl(n);
  for (std::size_t k = 0; k < n; ++k) fl[k] = f(d.values[k]);
  SymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += d.vec(i, k) * fl[k] * d.vec(j, k);
      out.set(i, j, s);
    }
  }
  return out;
}

inline SymMatrix frac_power(const SpectralDecomp& d, double q) {
  const double thr = pd_threshold(d);
  const bool integral = std::floor(q) == q;
  if (q < 0.0 && d.min() <= thr)
    throw SingularityError("frac_power: eigenvalue " + std::to_string(d.min()) +
                               " is not above the positive-definiteness threshold",
                           d.min());
  if (!integral && d.min() < -thr)
    throw SingularityError("frac_power: fractional power of an indefinite matrix", d.min());
  return spectral_apply(d, [&](double l) {
    if (q == 0.0) return 1.0;
    if (!integral && std::abs(l) <= thr) return 0.0;
    return std::pow(l, q);
  });
}

inline SymMatrix frac_power(const SymMatrix& m, double q) { return frac_power(sym_eig(m), q); }

//! x' M x
inline double quad_form(const SymMatrix& m, std::span<const double> x) {
  const std::size_t n = m.dim();
  if (x.size() != n)
    throw InputError("quad_form: vector has length " + std::to_string(x.size()) +
                     ", matrix has dimension " + std::to_string(n));
  const auto a = m.data();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.5 * a[i * n + i] * x[i];
    for (std::size_t j = i + 1; j < n; ++j) row += a[i * n + j] * x[j];
    s += x[i] * row;
  }
  return 2.0 * s;
}

inline double trace(const SymMatrix& m) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i) s += m(i, i);
  return s;
}

inline double min_eig(const SymMatrix& m) { return sym_eig(m).min(); }
inline double max_eig(const SymMatrix& m) { return sym_eig(m).max(); }

}  // namespace optdes
