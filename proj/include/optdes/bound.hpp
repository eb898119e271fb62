#pragma once

// Support delimitation for phi_p-optimal designs.
//
// Given any nonsingular design xi with t = tr(M^{-p}) and
// eps = max_x x'M^{-(p+1)}x - t, a candidate x can only support a
// phi_p-optimal design if
//
//     x' M^{-(p+1)} x >= C(xi, p) = omega1^{p+1} B,
//
// where omega1 is the unique root in ((alpha/gamma)^{1/(p+1)}, (1/gamma)^{1/(p+1)}] of
//
//     F(tau) = alpha / tau^{p+1} + (1-alpha)^{p+2} / (1 + beta - alpha tau)^{p+1} - gamma,
//
// with alpha = lambda_min(M^{-p}) / t and beta = eps / t. When t_* = tr(M_*^{-p})
// is known (always the case for p = 0, where t_* = m) gamma = t_*/t and
// B = t_*; otherwise gamma = max{1, (1+beta)^{-p}} and B = t min{1, (1+beta)^{-p}}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optdes/criteria.hpp"
#include "optdes/designspace.hpp"
#include "optdes/errors.hpp"

namespace optdes {

inline constexpr double kBetaZeroThreshold = 1e-14;
inline constexpr double kRootResidualTol = 1e-10;
//! Relative slack (in units of t) below C within which a point is still kept.
inline constexpr double kPruneRelSlack = 1e-12;

struct BoundReport {
  double t = 0.0;
  double eps = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double gamma = 1.0;
  double omega1 = 1.0;
  double B = 0.0;
  double C = 0.0;
  //! Threshold on the directional derivative: F(xi, x*) >= h_p for every optimal support point.
  double h_p = 0.0;
  bool t_star_known = false;
  //! Candidate attaining eps; never pruned.
  std::size_t argmax = 0;
};

//! F(tau; alpha, beta, gamma, p)
inline double bound_equation(double tau, double alpha, double beta, double gamma, double p) {
  const double q = p + 1.0;
  return alpha / std::pow(tau, q) + std::pow(1.0 - alpha, q + 1.0) / std::pow(1.0 + beta - alpha * tau, q) -
         gamma;
}

struct RootInterval {
  double lo = 0.0;  // open
  double hi = 0.0;  // closed
};

inline RootInterval root_interval(double alpha, double gamma, double p) {
  const double e = 1.0 / (p + 1.0);
  return {std::pow(alpha / gamma, e), std::pow(1.0 / gamma, e)};
}

namespace detail {
inline void check_root_inputs(double alpha, double beta, double gamma, double p) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("root_F: alpha must lie in (0, 1)");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InputError("root_F: beta must be finite and >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("root_F: gamma must be finite and > 0");
  if (!(p > -1.0) || !std::isfinite(p)) throw InputError("root_F: p must be finite and > -1");
}
}  // namespace detail

// Bisection on a bracketed sign change. F > 0 just right of the pole at the
// open left end and F <= 0 at the closed right end whenever gamma is
// consistent with the data; otherwise NumericalError carries both probes.
inline double root_F(double alpha, double beta, double gamma, double p, double tol = kRootResidualTol) {
  detail::check_root_inputs(alpha, beta, gamma, p);
  const auto [left, right] = root_interval(alpha, gamma, p);
  if (beta <= kBetaZeroThreshold) return right;

  const double scale = std::max(1.0, gamma);
  auto f = [&](double tau) { return bound_equation(tau, alpha, beta, gamma, p); };

  if (!(1.0 + beta - alpha * right > 0.0))
    throw NumericalError("root_F: the second pole lies inside the search interval");
  const double f_right = f(right);
  double lo = left * (1.0 + 1e-12);
  double f_lo = lo < right ? f(lo) : std::numeric_limits<double>::quiet_NaN();

  if (f_right > 0.0) {
    if (f_right <= tol * scale) return right;
    throw NumericalError("root_F: no sign change on the search interval (F(left+)=" + std::to_string(f_lo) +
                             ", F(right)=" + std::to_string(f_right) + ")",
                         f_lo, f_right);
  }
  if (f_right == 0.0) return right;
  if (!(lo < right)) return right;
  if (!(f_lo > 0.0)) {
    // F falls from +inf to below zero within a relative 1e-12 of the pole.
    if (std::abs(f_lo) <= tol * scale) return lo;
    throw NumericalError("root_F: F is not positive next to the left end of the interval (F(left+)=" +
                             std::to_string(f_lo) + ", F(right)=" + std::to_string(f_right) + ")",
                         f_lo, f_right);
  }

  double hi = right;
  double f_hi = f_right;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double fm = f(mid);
    if (fm > 0.0) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
      f_hi = fm;
    }
    if (hi - lo <= 1e-12 * hi && std::min(std::abs(f_lo), std::abs(f_hi)) <= tol * scale) break;
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

// Closed form for p = 0: clearing denominators gives
//   gamma alpha tau^2 + (1 - 2 alpha - gamma (1 + beta)) tau + alpha (1 + beta) = 0,
// whose smaller root is the one lying in (alpha/gamma, 1/gamma].
inline double root_F_p0(double alpha, double beta, double gamma) {
  detail::check_root_inputs(alpha, beta, gamma, 0.0);
  const double a = gamma * alpha;
  const double b = 1.0 - 2.0 * alpha - gamma * (1.0 + beta);
  const double c = alpha * (1.0 + beta);
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (disc < -1e-12 * b * b)
      throw NumericalError("root_F_p0: negative discriminant " + std::to_string(disc), disc, 0.0);
    disc = 0.0;
  }
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double r1 = q / a;
  const double r2 = c / q;
  const double left = alpha / gamma;
  const double right = 1.0 / gamma;
  const double slack = 1e-12 * right;
  std::optional<double> best;
  for (double r : {r1, r2}) {
    if (r > left && r <= right + slack && (!best || r < *best)) best = r;
  }
  if (!best) throw NumericalError("root_F_p0: no root inside the interval", r1, r2);
  return std::min(*best, right);
}

//! Bound evaluated at an arbitrary eps >= 0 for the given state.
inline BoundReport bound_at(const CriterionState& state, double eps, const CriterionConfig& cfg,
                            double tol = kRootResidualTol) {
  cfg.validate();
  if (!(eps >= 0.0)) throw InputError("bound: eps must be non-negative");
  const double p = state.p();
  const double t = state.t();
  const std::size_t m = state.dim();

  BoundReport r;
  r.t = t;
  r.eps = eps;
  r.beta = eps / t;
  r.t_star_known = cfg.t_star.has_value() || p == 0.0;

  if (m == 1) {
    // Nothing tighter than the equivalence-theorem equality is available.
    r.alpha = 1.0;
    r.gamma = 1.0;
    r.omega1 = 1.0;
    r.B = t;
    r.C = t;
    r.h_p = 0.0;
    return r;
  }

  r.alpha = state.min_eig_neg_p() / t;
  if (r.t_star_known) {
    const double t_star = cfg.t_star.value_or(static_cast<double>(m));
    r.gamma = t_star / t;
    r.B = t_star;
  } else {
    const double g = std::pow(1.0 + r.beta, -p);
    r.gamma = std::max(1.0, g);
    r.B = t * std::min(1.0, g);
  }
  r.omega1 = root_F(r.alpha, r.beta, r.gamma, p, tol);
  // At beta = 0, omega1^{p+1} B = B / gamma = t in both regimes.
  r.C = r.beta <= kBetaZeroThreshold ? t : std::pow(r.omega1, p + 1.0) * r.B;
  r.h_p = state.phi() * (r.C / t - 1.0);
  return r;
}

inline BoundReport support_bound(const CandidateSet& cands, const CriterionState& state,
                                 const CriterionConfig& cfg, unsigned threads = 1) {
  const auto e = epsilon(cands, state, threads);
  auto r = bound_at(state, e.eps, cfg);
  r.argmax = e.argmax;
  return r;
}

//! keep[i] iff i is active and d_i >= C - 1e-12 t, or i is the eps-argmax.
inline std::vector<bool> prune_mask(const CandidateSet& cands, std::span<const double> d, const BoundReport& report) {
  if (d.size() != cands.size()) throw InputError("prune_mask: variance array has wrong length");
  const double threshold = report.C - kPruneRelSlack * report.t;
  std::vector<bool> keep(cands.size(), false);
  for (std::size_t i = 0; i < cands.size(); ++i)
    keep[i] = cands.active(i) && (d[i] >= threshold || i == report.argmax);
  return keep;
}

inline std::vector<bool> prune_mask(const CandidateSet& cands, const CriterionState& state,
                                    const BoundReport& report, unsigned threads = 1) {
  return prune_mask(cands, variance_function(cands, state, threads), report);
}

//! h_p[M(xi), delta] with eps = delta t / phi(xi).
inline double h_p_threshold(const CriterionState& state, double delta, const CriterionConfig& cfg) {
  if (!(delta >= 0.0)) throw InputError("h_p_threshold: delta must be non-negative");
  return bound_at(state, delta * state.t() / state.phi(), cfg).h_p;
}

}  // namespace optdes
