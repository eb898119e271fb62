#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "optdes/reference_problems.hpp"
#include "optdes/solver.hpp"

using optdes::CandidateSet;
using optdes::CriterionState;
using optdes::DesignMeasure;
using optdes::SolveConfig;

namespace {

CandidateSet product_grid(double step) {
  return optdes::grid_candidates(optdes::ModelSpec::product(2, 2, -1.0, 1.0, step));
}

SolveConfig config(double p, std::size_t period) {
  SolveConfig cfg;
  cfg.p = p;
  cfg.prune_period = period;
  return cfg;
}

bool on_product_support(std::span<const double> s) {
  auto node = [](double v) { return std::abs(v + 1.0) < 1e-12 || std::abs(v) < 1e-12 || std::abs(v - 1.0) < 1e-12; };
  return node(s[0]) && node(s[1]);
}

}  // namespace

TEST(MultiplicativeStep, OptimumIsAFixedPoint) {
  const auto [c, xi] = optdes::example1_design(0.25);
  const CriterionState s(optdes::info_matrix(c, xi), {1.0, {}});
  const auto next = optdes::multiplicative_step(c, xi, s, config(1.0, 0));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(next.weights[i], xi.weights[i], 1e-14);
}

TEST(MultiplicativeStep, DOptimalDenominatorIsM) {
  std::mt19937_64 rng(41);
  std::exponential_distribution<double> e(1.0);
  const auto c = product_grid(0.25);
  DesignMeasure xi{std::vector<double>(c.size())};
  for (double& w : xi.weights) w = e(rng);
  const double total = xi.total();
  for (double& w : xi.weights) w /= total;
  const CriterionState s(optdes::info_matrix(c, xi), {0.0, {}});
  const auto d = optdes::variance_function(c, s);
  double denom = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) denom += xi.weights[i] * d[i];
  EXPECT_NEAR(denom, 9.0, 1e-12);
  const auto next = optdes::multiplicative_step(c, xi, d, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(next.weights[i], xi.weights[i] * d[i] / 9.0, 1e-15);
}

TEST(MultiplicativeStep, ThreePointAOptimumFromUniform) {
  const auto [c, xi0] = optdes::example1_design(1.0 / 3.0);
  auto cfg = config(1.0, 0);
  cfg.eff_tol = 1e-12;
  const auto r = optdes::solve(c, cfg, xi0);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.design.weights[0], 0.25, 1e-6);
  EXPECT_NEAR(r.design.weights[1], 0.5, 1e-6);
  EXPECT_NEAR(r.design.weights[2], 0.25, 1e-6);
}

TEST(MultiplicativeStep, InactivePointsStayAtZero) {
  auto c = product_grid(0.5);
  c.deactivate(4);
  const auto xi = optdes::uniform_design(c);
  const CriterionState s(optdes::info_matrix(c, xi), {1.0, {}});
  const auto next = optdes::multiplicative_step(c, xi, s, config(1.0, 0));
  EXPECT_EQ(next.weights[4], 0.0);
  EXPECT_NEAR(next.total(), 1.0, 1e-12);
}

TEST(ReallocateAfterPrune, Examples) {
  const DesignMeasure xi{{0.5, 0.3, 0.2}};
  EXPECT_EQ(optdes::reallocate_after_prune(xi, {true, true, true}).weights, xi.weights);
  const auto r = optdes::reallocate_after_prune(xi, {true, true, false});
  EXPECT_NEAR(r.weights[0], 0.625, 1e-15);
  EXPECT_NEAR(r.weights[1], 0.375, 1e-15);
  EXPECT_EQ(r.weights[2], 0.0);
  EXPECT_THROW(optdes::reallocate_after_prune(DesignMeasure{{1.0, 0.0}}, {false, true}), optdes::NumericalError);
  EXPECT_THROW(optdes::reallocate_after_prune(xi, {true}), optdes::InputError);
}

TEST(SupportOf, Examples) {
  const auto [c, xi] = optdes::example1_design_on_grid(0.25, 0.01);
  EXPECT_EQ(optdes::support_of(xi), (std::vector<std::size_t>{0, 100, 200}));
  EXPECT_EQ(optdes::support_of(optdes::uniform_design(c)).size(), 201u);
  const auto c2 = product_grid(0.1);
  const auto r = optdes::solve(c2, config(0.0, 10));
  ASSERT_TRUE(r.converged);
  const auto sup = optdes::support_of(r.design);
  ASSERT_EQ(sup.size(), 9u);
  for (auto i : sup) EXPECT_TRUE(on_product_support(c2.labels(i)));
}

TEST(Solve, ProductModelOptimalValues) {
  const auto c = product_grid(0.1);
  for (std::size_t period : {std::size_t{0}, std::size_t{10}}) {
    const auto r0 = optdes::solve(c, config(0.0, period));
    ASSERT_TRUE(r0.converged);
    EXPECT_NEAR(r0.phi, optdes::kProductPhi0Star, 1e-3 * optdes::kProductPhi0Star);
    const auto r1 = optdes::solve(c, config(1.0, period));
    ASSERT_TRUE(r1.converged);
    EXPECT_NEAR(r1.phi, optdes::kProductPhi1Star, 1e-3 * optdes::kProductPhi1Star);
  }
}

TEST(Solve, PrunedAndUnprunedRunsAgree) {
  const auto c = product_grid(0.1);
  for (double p : {0.0, 1.0}) {
    const auto plain = optdes::solve(c, config(p, 0));
    const auto pruned = optdes::solve(c, config(p, 1));
    ASSERT_TRUE(plain.converged && pruned.converged);
    EXPECT_NEAR(pruned.phi, plain.phi, 1e-6 * plain.phi);
    for (const auto& row : plain.trace.rows) EXPECT_EQ(row.n_active, c.size());
    std::size_t first_prune = 0;
    for (const auto& row : pruned.trace.rows)
      if (row.pruned > 0) {
        first_prune = row.k;
        break;
      }
    for (const auto& row : pruned.trace.rows)
      if (row.k >= first_prune) {
        EXPECT_LT(row.n_active, c.size());
      }
  }
}

TEST(Solve, SelfCertifyingForPOneHalf) {
  const auto c = product_grid(0.1);
  auto cfg = config(0.5, 10);
  const auto r = optdes::solve(c, cfg);
  ASSERT_TRUE(r.converged);
  const auto b = optdes::efficiency_bounds(CriterionState(optdes::info_matrix(c, r.design), {0.5, {}}), r.eps);
  EXPECT_LE(b.upper - b.lower, cfg.eff_tol * b.lower);
}

TEST(Solve, TraceInvariants) {
  const auto c = product_grid(0.1);
  for (double p : {0.0, 1.0}) {
    auto cfg = config(p, 1);
    const auto r = optdes::solve(c, cfg);
    ASSERT_FALSE(r.trace.rows.empty());
    std::size_t pruned_total = 0;
    for (std::size_t j = 0; j < r.trace.rows.size(); ++j) {
      const auto& row = r.trace.rows[j];
      pruned_total += row.pruned;
      if (j > 0) {
        EXPECT_GT(row.k, r.trace.rows[j - 1].k);
        EXPECT_LE(row.n_active, r.trace.rows[j - 1].n_active);
      }
      EXPECT_EQ(row.n_active + pruned_total, c.size());
      EXPECT_LE(row.phi, (p == 0.0 ? optdes::kProductPhi0Star : optdes::kProductPhi1Star) * (1 + 1e-12));
      EXPECT_GE(row.phi * (1.0 + row.eps / row.t),
                (p == 0.0 ? optdes::kProductPhi0Star : optdes::kProductPhi1Star) * (1 - 1e-12));
    }
    EXPECT_EQ(pruned_total, r.pruned_indices.size());
    EXPECT_EQ(r.trace.rows.back().k, r.iterations);
    for (auto i : r.pruned_indices) EXPECT_FALSE(on_product_support(c.labels(i)));
  }
}

TEST(Solve, MonotoneWithoutPruning) {
  const auto c = product_grid(0.1);
  for (double p : {0.0, 1.0}) {
    const auto r = optdes::solve(c, config(p, 0));
    for (std::size_t j = 1; j < r.trace.rows.size(); ++j)
      EXPECT_GE(r.trace.rows[j].phi, r.trace.rows[j - 1].phi - 1e-12);
  }
}

TEST(Solve, WeightsStayNormalized) {
  const auto c = product_grid(0.2);
  for (std::size_t iters : {1u, 2u, 5u, 17u, 60u}) {
    auto cfg = config(1.0, 1);
    cfg.max_iters = iters;
    cfg.eff_tol = 1e-15;
    const auto r = optdes::solve(c, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, iters);
    EXPECT_NEAR(r.design.total(), 1.0, 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!r.active[i]) {
        EXPECT_EQ(r.design.weights[i], 0.0);
      }
  }
}

TEST(Solve, TraceEvery) {
  auto cfg = config(0.0, 10);
  cfg.trace_every = 50;
  const auto r = optdes::solve(product_grid(0.1), cfg);
  for (std::size_t j = 0; j + 1 < r.trace.rows.size(); ++j) EXPECT_EQ(r.trace.rows[j].k % 50, 0u);
  EXPECT_EQ(r.trace.rows.back().k, r.iterations);
}

TEST(Solve, Errors) {
  const CandidateSet collinear(2, {1.0, 1.0, 2.0, 2.0});
  EXPECT_THROW(optdes::solve(collinear, config(1.0, 10)), optdes::SingularityError);
  auto cfg = config(1.0, 10);
  cfg.a = 0.0;
  EXPECT_THROW(optdes::solve(product_grid(0.5), cfg), optdes::InputError);
  cfg = config(1.0, 10);
  cfg.eff_tol = 0.0;
  EXPECT_THROW(optdes::solve(product_grid(0.5), cfg), optdes::InputError);
  cfg = config(1.0, 10);
  cfg.max_iters = 0;
  EXPECT_THROW(optdes::solve(product_grid(0.5), cfg), optdes::InputError);
  EXPECT_THROW(optdes::solve(product_grid(0.5), config(-1.0, 10)), optdes::InputError);
}

TEST(Solve, DeterministicAcrossRunsAndThreadCounts) {
  const auto c = product_grid(0.05);
  auto cfg = config(1.0, 10);
  const auto a = optdes::solve(c, cfg);
  const auto b = optdes::solve(c, cfg);
  cfg.threads = 3;
  const auto d = optdes::solve(c, cfg);
  EXPECT_EQ(a.design.weights, b.design.weights);
  EXPECT_EQ(a.design.weights, d.design.weights);
  EXPECT_EQ(a.iterations, d.iterations);
  EXPECT_EQ(a.pruned_indices, d.pruned_indices);
}

TEST(Solve, ThreePointModelOnFineGridNeverPrunesTheSupport) {
  const auto c = optdes::grid_candidates(optdes::ModelSpec::polynomial(2, -1.0, 1.0, 0.01));
  for (double p : {0.0, 1.0}) {
    for (std::size_t period : {1u, 10u}) {
      const auto r = optdes::solve(c, config(p, period));
      ASSERT_TRUE(r.converged);
      for (auto i : r.pruned_indices) EXPECT_TRUE(i != 0 && i != 100 && i != 200);
      EXPECT_NEAR(r.phi, optdes::example1_phi(optdes::example1_tau_star(p), p), 1e-6);
    }
  }
}
