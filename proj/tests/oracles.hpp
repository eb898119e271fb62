#pragma once

// Independent reference computations for the test suites. Nothing here uses
// the library's eigensolver.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "optdes/symmat.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const optdes::SymMatrix& m) {
  Dense a(m.dim(), std::vector<double>(m.dim()));
  for (std::size_t r = 0; r < m.dim(); ++r)
    for (std::size_t c = 0; c < m.dim(); ++c) a[r][c] = m(r, c);
  return a;
}

inline Dense identity(std::size_t n) {
  Dense a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
  return a;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  const std::size_t k = b.size();
  const std::size_t m = b.front().size();
  Dense c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

//! Gauss-Jordan with partial pivoting.
inline Dense inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv = identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle::inverse: singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

//! LU with partial pivoting.
inline double determinant(Dense a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  return det;
}

inline double trace(const Dense& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i][i];
  return s;
}

//! A^k for integer k (negative k through the inverse).
inline Dense int_power(const Dense& a, int k) {
  Dense base = k < 0 ? inverse(a) : a;
  Dense out = identity(a.size());
  for (int i = 0; i < std::abs(k); ++i) out = matmul(out, base);
  return out;
}

inline double quad(const Dense& a, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * a[i][j] * x[j];
  return s;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

//! Random symmetric matrix with entries in [-1, 1].
inline optdes::SymMatrix random_symmetric(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  optdes::SymMatrix a(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = r; c < m; ++c) a.set(r, c, u(rng));
  return a;
}

//! G G' / m + shift I with G uniform in [-1, 1]; well conditioned for shift ~ 0.1.
inline optdes::SymMatrix random_spd(std::size_t m, std::mt19937_64& rng, double shift = 0.1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> g(m * m);
  for (double& v : g) v = u(rng);
  optdes::SymMatrix a(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = r; c < m; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += g[r * m + k] * g[c * m + k];
      a.set(r, c, s / static_cast<double>(m) + (r == c ? shift : 0.0));
    }
  return a;
}

//! Phi_p from integer-power traces and determinants; only for integer p.
inline double phi_int(const optdes::SymMatrix& m, int p) {
  const Dense a = to_dense(m);
  const double dim = static_cast<double>(m.dim());
  if (p == 0) return std::pow(determinant(a), 1.0 / dim);
  return std::pow(trace(int_power(a, -p)) / dim, -1.0 / p);
}

//! Sign changes of f on a uniform grid of n points in (lo, hi].
inline std::vector<double> sign_changes(const std::function<double(double)>& f, double lo, double hi, std::size_t n) {
  std::vector<double> roots;
  double prev_x = lo + (hi - lo) / static_cast<double>(n);
  double prev = f(prev_x);
  for (std::size_t j = 2; j <= n; ++j) {
    const double x = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
    const double v = f(x);
    if ((prev > 0.0) != (v > 0.0)) roots.push_back(0.5 * (prev_x + x));
    prev = v;
    prev_x = x;
  }
  return roots;
}

}  // namespace oracle
