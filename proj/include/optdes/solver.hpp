#pragma once

// Multiplicative weight iterations for phi_p-optimal design,
//   w_i <- w_i d_i^a / sum_j w_j d_j^a,   d_i = x_i' M^{-(p+1)}(xi) x_i,
// with periodic deletion of candidates that fail the support bound.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "optdes/bound.hpp"
#include "optdes/criteria.hpp"
#include "optdes/designspace.hpp"
#include "optdes/errors.hpp"

namespace optdes {

struct SolveConfig {
  double p = 0.0;
  //! Multiplicative exponent; defaults to 1/(p+1).
  std::optional<double> a;
  std::size_t max_iters = 100000;
  //! Stop once eps/t <= eff_tol, i.e. phi* <= phi (1 + eff_tol).
  double eff_tol = 1e-6;
  //! Apply the support bound every prune_period iterations; 0 disables pruning.
  std::size_t prune_period = 10;
  std::optional<double> t_star;
  std::size_t trace_every = 1;
  unsigned threads = 1;

  double exponent() const { return a.value_or(1.0 / (p + 1.0)); }
  CriterionConfig criterion() const { return CriterionConfig{p, t_star}; }

  void validate() const {
    criterion().validate();
    if (!(exponent() > 0.0)) throw InputError("solve: multiplicative exponent a must be positive");
    if (!(eff_tol > 0.0)) throw InputError("solve: eff_tol must be positive");
    if (max_iters < 1) throw InputError("solve: max_iters must be at least 1");
    if (trace_every < 1) throw InputError("solve: trace_every must be at least 1");
  }
};

struct TraceRow {
  std::size_t k = 0;
  double phi = 0.0;
  double eps = 0.0;
  double t = 0.0;
  //! Active candidates once this iteration's pruning is applied.
  std::size_t n_active = 0;
  std::optional<double> C;
  std::size_t pruned = 0;
  double pruned_mass = 0.0;
};

struct SolveTrace {
  std::vector<TraceRow> rows;
};

struct SolveResult {
  DesignMeasure design;
  std::vector<bool> active;
  SolveTrace trace;
  BoundReport bound;
  bool converged = false;
  std::size_t iterations = 0;
  double phi = 0.0;
  double eps = 0.0;
  double t = 0.0;
  //! Every index removed by the bound, in removal order.
  std::vector<std::size_t> pruned_indices;
};

inline constexpr double kWeightFloor = 1e-250;

inline DesignMeasure multiplicative_step(const CandidateSet& cands, const DesignMeasure& xi,
                                         std::span<const double> d, double a) {
  if (xi.size() != cands.size() || d.size() != cands.size())
    throw InputError("multiplicative_step: arrays are not aligned with the candidate set");
  DesignMeasure out{std::vector<double>(cands.size(), 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cands.active(i) || xi.weights[i] == 0.0) continue;
    const double g = a == 1.0 ? d[i] : (a == 0.5 ? std::sqrt(d[i]) : std::pow(d[i], a));
    out.weights[i] = xi.weights[i] * g;
    total += out.weights[i];
  }
  if (!(total > 0.0)) throw std::logic_error("multiplicative_step: all variance values vanish on the support");
  // Weights below the floor are set to zero so that w x x' never reaches the
  // subnormal range, where arithmetic is very slow.
  for (double& w : out.weights) {
    w /= total;
    if (w < kWeightFloor) w = 0.0;
  }
  return out;
}

inline DesignMeasure multiplicative_step(const CandidateSet& cands, const DesignMeasure& xi,
                                         const CriterionState& state, const SolveConfig& cfg) {
  return multiplicative_step(cands, xi, variance_function(cands, state, cfg.threads), cfg.exponent());
}

//! Zeroes the pruned weights and rescales the survivors to unit mass.
inline DesignMeasure reallocate_after_prune(const DesignMeasure& xi, const std::vector<bool>& keep) {
  if (keep.size() != xi.size()) throw InputError("reallocate_after_prune: mask has wrong length");
  DesignMeasure out{std::vector<double>(xi.size(), 0.0)};
  double kept = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (keep[i]) kept += xi.weights[i];
  if (kept < 1e-12)
    throw NumericalError("reallocate_after_prune: surviving mass " + std::to_string(kept) + " is below 1e-12");
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (keep[i]) out.weights[i] = xi.weights[i] / kept;
  return out;
}

inline std::vector<std::size_t> support_of(const DesignMeasure& xi, double weight_floor = 1e-8) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (xi.weights[i] > weight_floor) idx.push_back(i);
  return idx;
}

// Each iteration k: build the criterion state of xi_k, record (phi, eps),
// stop on eps/t <= eff_tol or k == max_iters; on pruning iterations delete
// the candidates that fail the bound and rescale; then take one
// multiplicative step with the variances of xi_k restricted to survivors.
inline SolveResult solve(const CandidateSet& cands, const SolveConfig& cfg,
                         const std::optional<DesignMeasure>& init = std::nullopt) {
  cfg.validate();
  const CriterionConfig crit = cfg.criterion();
  const double a = cfg.exponent();

  CandidateSet work = cands;
  DesignMeasure xi = init ? *init : uniform_design(work);
  validate_design(work, xi);

  SolveResult res;
  for (std::size_t k = 0;; ++k) {
    std::optional<CriterionState> state;
    try {
      state.emplace(info_matrix(work, xi), crit);
    } catch (const SingularityError& e) {
      if (k == 0) throw SingularityError(std::string("solve: initial design is singular: ") + e.what(), e.eigenvalue());
      throw;
    }
    const auto d = variance_function(work, *state, cfg.threads);
    const auto e = epsilon_from_variances(work, d, state->t());

    TraceRow row{k, state->phi(), e.eps, state->t(), 0, std::nullopt, 0, 0.0};
    const bool converged = e.eps / state->t() <= cfg.eff_tol;
    const bool last = converged || k == cfg.max_iters;

    if (!last && cfg.prune_period > 0 && k % cfg.prune_period == 0) {
      auto rep = bound_at(*state, e.eps, crit);
      rep.argmax = e.argmax;
      const auto keep = prune_mask(work, d, rep);
      row.C = rep.C;
      for (std::size_t i = 0; i < work.size(); ++i) {
        if (work.active(i) && !keep[i]) {
          ++row.pruned;
          row.pruned_mass += xi.weights[i];
          res.pruned_indices.push_back(i);
        }
      }
      if (row.pruned > 0) {
        xi = reallocate_after_prune(xi, keep);
        work.set_active_mask(keep);
      }
    }
    row.n_active = work.active_count();
    if (k % cfg.trace_every == 0 || last) res.trace.rows.push_back(row);

    if (last) {
      res.bound = bound_at(*state, e.eps, crit);
      res.bound.argmax = e.argmax;
      res.converged = converged;
      res.iterations = k;
      res.phi = state->phi();
      res.eps = e.eps;
      res.t = state->t();
      break;
    }
    xi = multiplicative_step(work, xi, d, a);
  }
  res.design = std::move(xi);
  res.active = work.active_mask();
  return res;
}

}  // namespace optdes
