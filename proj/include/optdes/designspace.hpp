#pragma once

// Candidate points, design measures and the regression models used to
// generate them (univariate polynomials and tensor products thereof).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optdes/errors.hpp"

namespace optdes {

//! Finite design space: N regressor vectors in R^m plus an active mask.
//! Points are stored contiguously, point i occupying [i*m, (i+1)*m).
class CandidateSet {
 public:
  CandidateSet(std::size_t dim, std::vector<double> coords, std::vector<std::string> label_names = {},
               std::vector<double> labels = {})
      : dim_(dim), coords_(std::move(coords)), label_names_(std::move(label_names)),
        labels_(std::move(labels)) {
    if (dim_ == 0) throw InputError("CandidateSet: dimension must be at least 1");
    if (coords_.empty() || coords_.size() % dim_ != 0)
      throw InputError("CandidateSet: coordinate count " + std::to_string(coords_.size()) +
                       " is not a positive multiple of m=" + std::to_string(dim_));
    const std::size_t n = coords_.size() / dim_;
    if (labels_.size() != n * label_names_.size())
      throw InputError("CandidateSet: label array does not match point count");
    active_.assign(n, true);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return active_.size(); }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }

  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  std::span<const double> labels(std::size_t i) const noexcept {
    return {labels_.data() + i * label_names_.size(), label_names_.size()};
  }

  bool active(std::size_t i) const noexcept { return active_[i]; }
  const std::vector<bool>& active_mask() const noexcept { return active_; }
  std::size_t active_count() const noexcept {
    std::size_t c = 0;
    for (bool b : active_) c += b ? 1 : 0;
    return c;
  }

  void set_active_mask(std::vector<bool> mask) {
    if (mask.size() != size()) throw InputError("CandidateSet: active mask has wrong length");
    active_ = std::move(mask);
  }
  void deactivate(std::size_t i) noexcept { active_[i] = false; }

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<std::string> label_names_;
  std::vector<double> labels_;
  std::vector<bool> active_;
};

//! Probability weights aligned by index with a CandidateSet.
struct DesignMeasure {
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  double total() const noexcept {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

inline constexpr double kNormalizationTol = 1e-12;

//! Checks alignment, non-negativity, normalization and the zero-off-the-active-set rule.
inline void validate_design(const CandidateSet& cands, const DesignMeasure& xi) {
  if (xi.size() != cands.size())
    throw InputError("design has " + std::to_string(xi.size()) + " weights but the candidate set has " +
                     std::to_string(cands.size()) + " points");
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double w = xi.weights[i];
    if (!std::isfinite(w) || w < 0.0)
      throw InputError("design weight " + std::to_string(i) + " is negative or non-finite");
    if (w != 0.0 && !cands.active(i))
      throw InputError("design puts mass on inactive candidate " + std::to_string(i));
  }
  if (std::abs(xi.total() - 1.0) > kNormalizationTol)
    throw InputError("design weights sum to " + std::to_string(xi.total()) + ", expected 1");
}

inline DesignMeasure uniform_design(const CandidateSet& cands) {
  const std::size_t n_active = cands.active_count();
  if (n_active == 0) throw InputError("uniform_design: no active candidates");
  DesignMeasure xi{std::vector<double>(cands.size(), 0.0)};
  const double w = 1.0 / static_cast<double>(n_active);
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (cands.active(i)) xi.weights[i] = w;
  return xi;
}

//! (1, s, s^2, ..., s^degree)
inline std::vector<double> poly_features(double s, int degree) {
  if (degree < 0) throw InputError("poly_features: degree must be non-negative");
  std::vector<double> x(static_cast<std::size_t>(degree) + 1);
  double v = 1.0;
  for (auto& xi : x) {
    xi = v;
    v *= s;
  }
  return x;
}

//! Kronecker product: (x1[0]*x2, x1[1]*x2, ...).
inline std::vector<double> tensor_product(std::span<const double> x1, std::span<const double> x2) {
  std::vector<double> out;
  out.reserve(x1.size() * x2.size());
  for (double a : x1)
    for (double b : x2) out.push_back(a * b);
  return out;
}

//! One factor of a product model: polynomial of `degree` in s, s on a uniform grid.
struct FactorSpec {
  int degree = 2;
  double lo = -1.0;
  double hi = 1.0;
  double step = 0.1;

  std::size_t grid_size() const {
    if (degree < 0) throw InputError("FactorSpec: degree must be non-negative");
    if (!(hi > lo)) throw InputError("FactorSpec: range must be non-degenerate");
    if (!(step > 0.0)) throw InputError("FactorSpec: grid step must be positive");
    const double span = hi - lo;
    if (step > span) throw InputError("FactorSpec: grid step is larger than the range");
    return static_cast<std::size_t>(std::floor(span / step + 1e-9)) + 1;
  }
  double node(std::size_t k) const noexcept { return lo + static_cast<double>(k) * step; }
};

//! A single factor is the polynomial model; several factors give the
//! complete product-type interaction model x(s_1) (x) ... (x) x(s_d).
struct ModelSpec {
  std::vector<FactorSpec> factors;

  std::size_t dim() const {
    std::size_t m = 1;
    for (const auto& f : factors) m *= static_cast<std::size_t>(f.degree) + 1;
    return m;
  }

  std::vector<double> features(std::span<const double> s) const {
    if (s.size() != factors.size()) throw InputError("ModelSpec: wrong number of coordinates");
    std::vector<double> x{1.0};
    for (std::size_t f = 0; f < factors.size(); ++f)
      x = tensor_product(x, poly_features(s[f], factors[f].degree));
    return x;
  }

  static ModelSpec polynomial(int degree, double lo, double hi, double step) {
    return ModelSpec{{FactorSpec{degree, lo, hi, step}}};
  }
  static ModelSpec product(std::size_t n_factors, int degree, double lo, double hi, double step) {
    return ModelSpec{std::vector<FactorSpec>(n_factors, FactorSpec{degree, lo, hi, step})};
  }
};

// Grid points enumerate factor indices lexicographically (first factor
// slowest); label columns s_1..s_d carry the generating coordinates.
inline CandidateSet grid_candidates(const ModelSpec& spec) {
  if (spec.factors.empty()) throw InputError("grid_candidates: model has no factors");
  std::vector<std::size_t> sizes;
  std::size_t total = 1;
  for (const auto& f : spec.factors) {
    sizes.push_back(f.grid_size());
    total *= sizes.back();
  }
  const std::size_t d = spec.factors.size();
  const std::size_t m = spec.dim();
  std::vector<double> coords;
  std::vector<double> labels;
  coords.reserve(total * m);
  labels.reserve(total * d);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> s(d);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t f = 0; f < d; ++f) s[f] = spec.factors[f].node(idx[f]);
    const auto x = spec.features(s);
    coords.insert(coords.end(), x.begin(), x.end());
    labels.insert(labels.end(), s.begin(), s.end());
    for (std::size_t f = d; f-- > 0;) {
      if (++idx[f] < sizes[f]) break;
      idx[f] = 0;
    }
  }
  std::vector<std::string> names;
  for (std::size_t f = 0; f < d; ++f) names.push_back("s_" + std::to_string(f + 1));
  return CandidateSet(m, std::move(coords), std::move(names), std::move(labels));
}

//! Index of the grid node closest to s on a one-factor spec.
inline std::size_t nearest_node(const FactorSpec& f, double s) {
  const double k = std::round((s - f.lo) / f.step);
  if (k < 0.0 || k >= static_cast<double>(f.grid_size()))
    throw InputError("nearest_node: coordinate outside the grid");
  return static_cast<std::size_t>(k);
}

//! Symmetric three-point design tau*delta(-1) + (1-2tau)*delta(0) + tau*delta(1)
//! for the quadratic model x(s) = (1, s, s^2).
inline std::pair<CandidateSet, DesignMeasure> example1_design(double tau) {
  if (!(tau >= 0.0 && tau <= 0.5)) throw InputError("example1_design: tau must lie in [0, 1/2]");
  auto cands = grid_candidates(ModelSpec::polynomial(2, -1.0, 1.0, 1.0));
  return {std::move(cands), DesignMeasure{{tau, 1.0 - 2.0 * tau, tau}}};
}

//! Same three-point design, embedded in the s-grid with the given step
//! (mass carried by the grid nodes -1, 0, 1).
inline std::pair<CandidateSet, DesignMeasure> example1_design_on_grid(double tau, double step) {
  if (!(tau >= 0.0 && tau <= 0.5)) throw InputError("example1_design: tau must lie in [0, 1/2]");
  const auto spec = ModelSpec::polynomial(2, -1.0, 1.0, step);
  auto cands = grid_candidates(spec);
  const auto& f = spec.factors.front();
  DesignMeasure xi{std::vector<double>(cands.size(), 0.0)};
  const std::size_t left = nearest_node(f, -1.0);
  const std::size_t mid = nearest_node(f, 0.0);
  const std::size_t right = nearest_node(f, 1.0);
  if (std::abs(f.node(mid)) > 1e-12 || std::abs(f.node(right) - 1.0) > 1e-12)
    throw InputError("example1_design_on_grid: grid does not contain the nodes -1, 0, 1");
  xi.weights[left] = tau;
  xi.weights[mid] = 1.0 - 2.0 * tau;
  xi.weights[right] = tau;
  return {std::move(cands), std::move(xi)};
}

}  // namespace optdes
