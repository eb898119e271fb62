#pragma once

// Reference problems with known optima.
//
// Quadratic regression x(s) = (1, s, s^2), s in [-1, 1]: every phi_p-optimal
// design is xi_tau = tau delta(-1) + (1 - 2 tau) delta(0) + tau delta(1) for
// some tau*(p). The product model x(s1) (x) x(s2) on [-1,1]^2 has as optimum
// the cross product of the one-factor optima, with phi_0* = 16^{1/3}/9 and
// phi_1* = 9/64.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "optdes/bound.hpp"
#include "optdes/criteria.hpp"
#include "optdes/errors.hpp"
#include "optdes/symmat.hpp"

namespace optdes {

inline const double kProductPhi0Star = std::cbrt(16.0) / 9.0;
inline constexpr double kProductPhi1Star = 9.0 / 64.0;

//! Maximizer of a unimodal f on [lo, hi].
template <class Fn>
double golden_section_max(Fn&& f, double lo, double hi, double tol = 1e-10, int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

//! M(xi_tau) = [[1, 0, 2tau], [0, 2tau, 0], [2tau, 0, 2tau]]
inline SymMatrix example1_info(double tau) {
  return SymMatrix::from_rows({{1.0, 0.0, 2.0 * tau}, {0.0, 2.0 * tau, 0.0}, {2.0 * tau, 0.0, 2.0 * tau}});
}

inline double example1_phi(double tau, double p) { return phi_p(example1_info(tau), CriterionConfig{p, {}}); }

inline constexpr double kTauMargin = 1e-6;

//! tau*(p) maximizing phi_p(xi_tau) over (0, 1/2).
inline double example1_tau_star(double p, double tol = 1e-10) {
  return golden_section_max([p](double tau) { return example1_phi(tau, p); }, kTauMargin, 0.5 - kTauMargin, tol);
}

//! tr(M^{-p}) at the optimum, i.e. the known t_*.
inline double example1_t_star(double p) {
  const CriterionState s(example1_info(example1_tau_star(p)), CriterionConfig{p, {}});
  return s.t();
}

//! max over s in [-1, 1] of d(s) = x(s)' A x(s) for a symmetric 3x3 A.
inline double example1_max_variance(const SymMatrix& a) {
  // d(s) = c0 + c1 s + c2 s^2 + c3 s^3 + c4 s^4
  const std::array<double, 5> c{a(0, 0), 2.0 * a(0, 1), 2.0 * a(0, 2) + a(1, 1), 2.0 * a(1, 2), a(2, 2)};
  auto d = [&](double s) { return c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * c[4]))); };
  auto dd = [&](double s) { return c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * 4.0 * c[4])); };
  double best = std::max(d(-1.0), d(1.0));
  constexpr int kCells = 2000;
  for (int j = 0; j < kCells; ++j) {
    double lo = -1.0 + 2.0 * j / kCells;
    double hi = -1.0 + 2.0 * (j + 1) / kCells;
    double flo = dd(lo);
    const double fhi = dd(hi);
    if (flo == 0.0) best = std::max(best, d(lo));
    if ((flo > 0.0) == (fhi > 0.0)) continue;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = dd(mid);
      if ((fm > 0.0) == (flo > 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    best = std::max(best, d(0.5 * (lo + hi)));
  }
  return best;
}

//! eps(xi_tau, p) over the continuous design space [-1, 1].
inline double example1_epsilon(double tau, double p) {
  const CriterionState s(example1_info(tau), CriterionConfig{p, {}});
  return std::max(0.0, example1_max_variance(s.inv_power()) - s.t());
}

//! tau(p, eps) > tau*(p) with eps(xi_tau, p) = eps_target.
inline double example1_tau_for_epsilon(double p, double eps_target) {
  if (!(eps_target > 0.0)) throw InputError("example1_tau_for_epsilon: target must be positive");
  double lo = example1_tau_star(p);
  double hi = 0.5 - kTauMargin;
  if (example1_epsilon(hi, p) < eps_target)
    throw NumericalError("example1_tau_for_epsilon: target eps is not reached before tau = 1/2");
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (example1_epsilon(mid, p) < eps_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace optdes
