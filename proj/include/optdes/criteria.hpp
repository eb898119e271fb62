#pragma once

// Kiefer's phi_p criteria in positively homogeneous form,
//   Phi_p(M) = [tr(M^{-p}) / m]^{-1/p},   Phi_0(M) = det(M)^{1/m},
// their gradient, the directional derivative towards a one-point design,
// the efficiency certificate and the equivalence-theorem check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optdes/designspace.hpp"
#include "optdes/errors.hpp"
#include "optdes/parallel.hpp"
#include "optdes/symmat.hpp"

namespace optdes {

struct CriterionConfig {
  double p = 0.0;
  //! Known tr(M_*^{-p}) at the optimum, if any.
  std::optional<double> t_star;

  void validate() const {
    if (!(p > -1.0) || !std::isfinite(p)) throw InputError("criterion exponent p must be a finite value > -1");
    if (t_star && !(*t_star > 0.0)) throw InputError("t_star must be positive");
  }
};

namespace detail {

// Assumes every eigenvalue is positive.
inline double phi_from_spectrum(std::span<const double> lambda, double p) {
  const double m = static_cast<double>(lambda.size());
  if (p == 0.0) {
    double s = 0.0;
    for (double l : lambda) s += std::log(l);
    return std::exp(s / m);
  }
  // log(mean l^{-p}) through expm1/log1p keeps the small-|p| regime accurate.
  double s = 0.0;
  for (double l : lambda) s += std::expm1(-p * std::log(l));
  return std::exp(-std::log1p(s / m) / p);
}

}  // namespace detail

inline double phi_p(const SymMatrix& m, const CriterionConfig& cfg) {
  cfg.validate();
  const auto d = sym_eig(m);
  if (!is_positive_definite(d)) {
    if (cfg.p >= 0.0 && d.min() >= -pd_threshold(d)) return 0.0;
    throw SingularityError("phi_p: matrix is singular and the criterion is undefined for p = " +
                               std::to_string(cfg.p),
                           d.min());
  }
  return detail::phi_from_spectrum(d.values, cfg.p);
}

//! Spectral data of one information matrix, cached for repeated evaluation
//! of the variance function x' M^{-(p+1)} x.
class CriterionState {
 public:
  CriterionState(const SymMatrix& m, const CriterionConfig& cfg)
      : p_(cfg.p), info_(m), spectrum_(sym_eig(m)), inv_power_(m.dim()) {
    cfg.validate();
    if (!is_positive_definite(spectrum_))
      throw SingularityError("information matrix is singular (smallest eigenvalue " +
                                 std::to_string(spectrum_.min()) + ")",
                             spectrum_.min());
    inv_power_ = frac_power(spectrum_, -(p_ + 1.0));
    t_ = 0.0;
    min_neg_p_ = std::numeric_limits<double>::infinity();
    for (double l : spectrum_.values) {
      const double v = p_ == 0.0 ? 1.0 : std::pow(l, -p_);
      t_ += v;
      min_neg_p_ = std::min(min_neg_p_, v);
    }
    phi_ = detail::phi_from_spectrum(spectrum_.values, p_);
  }

  double p() const noexcept { return p_; }
  std::size_t dim() const noexcept { return info_.dim(); }
  const SymMatrix& info() const noexcept { return info_; }
  const SpectralDecomp& spectrum() const noexcept { return spectrum_; }
  //! M^{-(p+1)}
  const SymMatrix& inv_power() const noexcept { return inv_power_; }
  //! t = tr(M^{-p})
  double t() const noexcept { return t_; }
  double phi() const noexcept { return phi_; }
  //! lambda_min(M^{-p})
  double min_eig_neg_p() const noexcept { return min_neg_p_; }

  double variance(std::span<const double> x) const { return quad_form(inv_power_, x); }

 private:
  double p_;
  SymMatrix info_;
  SpectralDecomp spectrum_;
  SymMatrix inv_power_;
  double t_ = 0.0;
  double phi_ = 0.0;
  double min_neg_p_ = 0.0;
};

//! M(xi) = sum_i w_i x_i x_i'
inline SymMatrix info_matrix(const CandidateSet& cands, const DesignMeasure& xi) {
  if (xi.size() != cands.size())
    throw InputError("info_matrix: design has " + std::to_string(xi.size()) +
                     " weights but the candidate set has " + std::to_string(cands.size()) + " points");
  const std::size_t m = cands.dim();
  std::vector<double> acc(m * m, 0.0);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double w = xi.weights[i];
    if (w == 0.0) continue;
    const auto x = cands.point(i);
    for (std::size_t r = 0; r < m; ++r) {
      const double wxr = w * x[r];
      double* row = acc.data() + r * m;
      for (std::size_t c = r; c < m; ++c) row[c] += wxr * x[c];
    }
  }
  SymMatrix out(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = r; c < m; ++c) out.set(r, c, acc[r * m + c]);
  return out;
}

//! grad Phi_p(M) = Phi_p(M) / tr(M^{-p}) * M^{-(p+1)}
inline SymMatrix phi_p_gradient(const SymMatrix& m, const CriterionConfig& cfg) {
  const CriterionState s(m, cfg);
  return s.inv_power() * (s.phi() / s.t());
}

//! F(xi, x) = phi(xi) [x' M^{-(p+1)} x / t - 1]
inline double dir_derivative(const CriterionState& state, std::span<const double> x) {
  return state.phi() * (state.variance(x) / state.t() - 1.0);
}

//! x_i' M^{-(p+1)} x_i for every active candidate; NaN on inactive ones.
inline std::vector<double> variance_function(const CandidateSet& cands, const CriterionState& state,
                                             unsigned threads = 1) {
  if (cands.dim() != state.dim()) throw InputError("variance_function: dimension mismatch");
  std::vector<double> d(cands.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(cands.size(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      if (cands.active(i)) d[i] = state.variance(cands.point(i));
  });
  return d;
}

struct EpsilonResult {
  double eps = 0.0;
  std::size_t argmax = 0;
  double max_variance = 0.0;
};

// eps = max_i d_i - t over the active set, smallest index on ties. The
// weighted average of d over xi equals t, so eps >= 0 whenever xi lives on
// the active set; only rounding can push the raw difference below zero,
// and it is clamped.
inline EpsilonResult epsilon_from_variances(const CandidateSet& cands, std::span<const double> d, double t) {
  bool any = false;
  EpsilonResult r;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands.active(i)) continue;
    if (!any || d[i] > r.max_variance) {
      r.max_variance = d[i];
      r.argmax = i;
      any = true;
    }
  }
  if (!any) throw InputError("epsilon: candidate set has no active points");
  r.eps = std::max(0.0, r.max_variance - t);
  return r;
}

inline EpsilonResult epsilon(const CandidateSet& cands, const CriterionState& state, unsigned threads = 1) {
  if (cands.active_count() == 0) throw InputError("epsilon: candidate set has no active points");
  const auto d = variance_function(cands, state, threads);
  return epsilon_from_variances(cands, d, state.t());
}

struct EfficiencyBounds {
  double lower = 0.0;
  double upper = 0.0;
};

//! phi(xi) <= phi* <= phi(xi) (1 + eps/t)
inline EfficiencyBounds efficiency_bounds(const CriterionState& state, double eps) {
  if (!(eps >= 0.0)) throw InputError("efficiency_bounds: eps must be non-negative");
  return {state.phi(), state.phi() * (1.0 + eps / state.t())};
}

struct SupportResidual {
  std::size_t index = 0;
  double weight = 0.0;
  //! (d_i - t) / t; zero at an optimum.
  double residual = 0.0;
};

struct EquivalenceReport {
  bool optimal = false;
  double t = 0.0;
  double max_variance = 0.0;
  std::vector<std::size_t> violating;
  std::vector<SupportResidual> support;
};

//! Optimal iff max_i d_i <= t (1 + tol).
inline EquivalenceReport equivalence_check(const CandidateSet& cands, const DesignMeasure& xi,
                                           const CriterionConfig& cfg, double tol,
                                           double weight_floor = 1e-8, unsigned threads = 1) {
  const CriterionState state(info_matrix(cands, xi), cfg);
  const auto d = variance_function(cands, state, threads);
  const auto e = epsilon_from_variances(cands, d, state.t());
  EquivalenceReport rep;
  rep.t = state.t();
  rep.max_variance = e.max_variance;
  const double limit = state.t() * (1.0 + tol);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands.active(i)) continue;
    if (d[i] > limit) rep.violating.push_back(i);
    if (xi.weights[i] > weight_floor)
      rep.support.push_back({i, xi.weights[i], (d[i] - state.t()) / state.t()});
  }
  rep.optimal = rep.violating.empty();
  return rep;
}

}  // namespace optdes
