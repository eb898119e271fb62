#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "optdes/reference_problems.hpp"
#include "oracles.hpp"

TEST(GoldenSection, FindsQuadraticMaximum) {
  EXPECT_NEAR(optdes::golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0), 0.3, 1e-9);
  EXPECT_NEAR(optdes::golden_section_max([](double x) { return std::log(x) - x; }, 0.1, 5.0), 1.0, 1e-7);
}

TEST(Example1, OptimalTau) {
  EXPECT_NEAR(optdes::example1_tau_star(0.0), 1.0 / 3.0, 1e-6);
  EXPECT_NEAR(optdes::example1_tau_star(1.0), 0.25, 1e-6);
  EXPECT_NEAR(optdes::example1_tau_star(-0.5), 0.45, 5e-3);
}

TEST(Example1, OptimalTraceForAOptimality) { EXPECT_NEAR(optdes::example1_t_star(1.0), 8.0, 1e-9); }

TEST(Example1, OptimaSatisfyEquivalenceOnFineGrid) {
  for (double p : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    const double tau = optdes::example1_tau_star(p);
    EXPECT_LE(optdes::example1_epsilon(tau, p) / optdes::example1_t_star(p), 1e-6) << "p=" << p;
  }
}

TEST(Example1Property, MaxVarianceMatchesDenseScan) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::random_symmetric(3, rng);
    const auto dense = oracle::to_dense(a);
    double scan = -INFINITY;
    for (int k = 0; k <= 200000; ++k) {
      const double s = -1.0 + 2.0 * k / 200000.0;
      scan = std::max(scan, oracle::quad(dense, {1.0, s, s * s}));
    }
    const double v = optdes::example1_max_variance(a);
    EXPECT_GE(v, scan - 1e-12);
    EXPECT_LE(v, scan + 1e-8);
  }
}

TEST(Example1, TauForEpsilonInvertsEpsilon) {
  for (double p : {-0.5, 0.0, 1.0})
    for (double eps : {0.1, 0.5}) {
      const double tau = optdes::example1_tau_for_epsilon(p, eps);
      EXPECT_GT(tau, optdes::example1_tau_star(p));
      EXPECT_NEAR(optdes::example1_epsilon(tau, p), eps, 1e-9);
    }
  EXPECT_THROW(optdes::example1_tau_for_epsilon(1.0, 0.0), optdes::InputError);
  EXPECT_THROW(optdes::example1_tau_for_epsilon(1.0, -0.1), optdes::InputError);
  EXPECT_GT(optdes::example1_tau_for_epsilon(1.0, 1e9), 0.49);
}

TEST(ProductModel, ReferenceValues) {
  EXPECT_NEAR(optdes::kProductPhi0Star, 0.279982, 1e-6);
  EXPECT_EQ(optdes::kProductPhi1Star, 0.140625);
  // Cross product of the one-factor optima.
  const auto c = optdes::grid_candidates(optdes::ModelSpec::product(2, 2, -1.0, 1.0, 1.0));
  for (auto [p, tau, star] : {std::tuple{0.0, 1.0 / 3.0, optdes::kProductPhi0Star},
                              std::tuple{1.0, 0.25, optdes::kProductPhi1Star}}) {
    const double w1[3] = {tau, 1.0 - 2.0 * tau, tau};
    optdes::DesignMeasure xi{std::vector<double>(9)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) xi.weights[3 * i + j] = w1[i] * w1[j];
    const optdes::CriterionState s(optdes::info_matrix(c, xi), {p, {}});
    EXPECT_NEAR(s.phi(), star, 1e-14);
    EXPECT_LE(optdes::epsilon(c, s).eps, 1e-12);
  }
}
