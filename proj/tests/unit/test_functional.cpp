#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "riskclt/error.hpp"
#include "riskclt/functional.hpp"
#include "riskclt/risk_measures.hpp"
#include "support.hpp"

using namespace riskclt;
using riskclt::test::identity_chain;
using riskclt::test::scalars;

namespace {

constexpr double kTwoPointSemidev = 0.35355339059327379;  // 0.5 * sqrt(0.5)

CompositeFunctional semidev_with_boxes(const SampleSet& s, double p = 2.0, double kappa = 0.5) {
  return build_semideviation(p, kappa).with_boxes(semideviation_boxes(s, p));
}

// A smooth two-level chain with a vector-valued middle stage:
// f3(x) = (x, x^2), f2(eta, x) = exp(-(x - eta_1)^2) + eta_2, f1(eta, x) = x + log(1 + eta^2).
CompositeFunctional smooth_chain() {
  StageFunction f1{1, 1,
                   [](std::span<const double> eta, std::span<const double> x, std::span<double> out) {
                     out[0] = x[0] + std::log1p(eta[0] * eta[0]);
                   },
                   [](std::span<const double> eta, std::span<const double>, std::span<double> out) {
                     out[0] = 2.0 * eta[0] / (1.0 + eta[0] * eta[0]);
                   }};
  StageFunction f2{2, 1,
                   [](std::span<const double> eta, std::span<const double> x, std::span<double> out) {
                     const double d = x[0] - eta[0];
                     out[0] = std::exp(-d * d) + eta[1];
                   },
                   [](std::span<const double> eta, std::span<const double> x, std::span<double> out) {
                     const double d = x[0] - eta[0];
                     out[0] = 2.0 * d * std::exp(-d * d);
                     out[1] = 1.0;
                   }};
  StageFunction f3{0, 2,
                   [](std::span<const double>, std::span<const double> x, std::span<double> out) {
                     out[0] = x[0];
                     out[1] = x[0] * x[0];
                   },
                   {}};
  return CompositeFunctional({f1, f2, f3}, {Box::interval(-100.0, 100.0), Box{{-10.0, 0.0}, {10.0, 100.0}}}, 1);
}

}  // namespace

TEST(EvaluatePlugin, IdentityChainIsSampleMean) {
  EXPECT_DOUBLE_EQ(evaluate_plugin(identity_chain(), scalars({1, 2, 3})), 2.0);
}

TEST(EvaluatePlugin, SemideviationOnTwoPoints) {
  const auto s = scalars({-1, 1});
  EXPECT_NEAR(evaluate_plugin(build_semideviation(2.0, 0.5), s), kTwoPointSemidev, 1e-15);
  EXPECT_NEAR(evaluate_plugin(semidev_with_boxes(s), s), kTwoPointSemidev, 1e-15);
}

TEST(EvaluatePlugin, ConstantSampleEqualsDeterministicNesting) {
  for (double c : {-3.25, 0.0, 7.5}) {
    const auto s = scalars(std::vector<double>(17, c));
    EXPECT_EQ(evaluate_plugin(semidev_with_boxes(s, 2.0, 0.5), s), c);
    EXPECT_EQ(evaluate_plugin(semidev_with_boxes(s, 3.0, 1.0), s), c);

    const auto cf = smooth_chain();
    // f3(c) = (c, c^2); f2 = exp(0) + c^2; f1 = c + log(1 + (1 + c^2)^2).
    const double expected = c + std::log1p((1.0 + c * c) * (1.0 + c * c));
    EXPECT_DOUBLE_EQ(evaluate_plugin(cf, s), expected);
  }
}

TEST(EvaluatePlugin, DimensionMismatch) {
  const SampleSet two_d({1, 2, 3, 4}, 2);
  EXPECT_THROW(evaluate_plugin(identity_chain(), two_d), DimensionMismatch);
}

TEST(EvaluatePlugin, DomainEscapeReportsTheBox) {
  const auto s = scalars({-1, 1});
  const auto cf = build_semideviation(2.0, 0.5).with_boxes({Box::interval(0.0, 10.0), Box::interval(5.0, 6.0)});
  try {
    evaluate_plugin(cf, s);
    FAIL() << "expected DomainEscape";
  } catch (const DomainEscape& e) {
    EXPECT_EQ(e.stage(), 2u);
  }
  const auto tight = build_semideviation(2.0, 0.5).with_boxes({Box::interval(0.0, 0.1), Box::interval(-1.0, 1.0)});
  try {
    evaluate_plugin(tight, s);
    FAIL() << "expected DomainEscape";
  } catch (const DomainEscape& e) {
    EXPECT_EQ(e.stage(), 1u);
  }
}

TEST(CompositeFunctional, RejectsBrokenDimensionChains) {
  auto stages = std::vector<StageFunction>{identity_chain().stage(1), identity_chain().stage(2)};
  EXPECT_THROW(CompositeFunctional(stages, {}, 1), DimensionMismatch);
  EXPECT_THROW(CompositeFunctional({stages[1]}, {}, 1), DimensionMismatch);
  auto wide = stages;
  wide[1].output_dim = 2;
  EXPECT_THROW(CompositeFunctional(wide, {Box::unbounded(1)}, 1), DimensionMismatch);
  EXPECT_THROW(CompositeFunctional(stages, {Box::unbounded(2)}, 1), DimensionMismatch);
}

TEST(MeanChain, IdentityOnConstant) {
  const auto chain = mean_chain(identity_chain(), scalars({4, 4, 4}));
  EXPECT_EQ(chain.mu(2)[0], 4.0);
  EXPECT_EQ(chain.mu(1)[0], 4.0);
}

TEST(MeanChain, SemideviationTwoPoints) {
  const auto s = scalars({-1, 1});
  const auto chain = mean_chain(semidev_with_boxes(s), s);
  EXPECT_EQ(chain.mu(3)[0], 0.0);
  EXPECT_EQ(chain.mu(2)[0], 0.5);
  EXPECT_NEAR(chain.mu(1)[0], kTwoPointSemidev, 1e-15);
}

TEST(MeanChain, ConstantSampleHasZeroSemideviation) {
  const auto s = scalars(std::vector<double>(9, 2.5));
  const auto chain = mean_chain(semidev_with_boxes(s), s);
  EXPECT_EQ(chain.mu(2)[0], 0.0);
  EXPECT_EQ(chain.mu(1)[0], 2.5);
}

TEST(MeanChain, TopEqualsPluginExactly) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    const auto cf = semidev_with_boxes(s);
    EXPECT_EQ(mean_chain(cf, s).value(), evaluate_plugin(cf, s));
  }
}

TEST(XiRecursion, ZeroDirection) {
  const auto s = scalars({-1, 1});
  const auto cf = semidev_with_boxes(s);
  EXPECT_EQ(xi_recursion(cf, mean_chain(cf, s), DirectionBundle::zero(cf), s), 0.0);
}

TEST(XiRecursion, IdentityChainTerminalDirection) {
  const auto s = scalars({1, 5, 2});
  const auto cf = identity_chain();
  const auto d = DirectionBundle::constant({{0.0}}, {1.0});
  EXPECT_DOUBLE_EQ(xi_recursion(cf, mean_chain(cf, s), d, s), 1.0);
}

TEST(XiRecursion, SemideviationHandValues) {
  const auto s = scalars({-1, 1});
  const auto cf = semidev_with_boxes(s);
  const auto chain = mean_chain(cf, s);
  // xi_2 = -p E[(X - mu_3)_+] = -1; xi_1 = (kappa/p) mu_2^{-1/2} xi_2 + d_1.
  const double slope = 0.25 / std::sqrt(0.5);
  EXPECT_NEAR(xi_recursion(cf, chain, DirectionBundle::constant({{0.0}, {0.0}}, {1.0}), s), -slope, 1e-14);
  // With d_1 = 1 as well the two-point example gives 1 - 0.5 * 0.5 * 0.5^{-1/2}.
  EXPECT_NEAR(xi_recursion(cf, chain, DirectionBundle::constant({{1.0}, {0.0}}, {1.0}), s), 0.64644660940672627,
              1e-14);
}

TEST(XiRecursion, CoefficientsReproduceRecursion) {
  const auto s = riskclt::test::random_sample(11);
  const auto cf = semidev_with_boxes(s);
  const auto chain = mean_chain(cf, s);
  const auto a = xi_coefficients(cf, chain, s);
  ASSERT_EQ(a.size(), 3u);
  const auto d = DirectionBundle::constant({{0.3}, {-1.7}}, {2.2});
  EXPECT_NEAR(xi_recursion(cf, chain, d, s), a[0] * 0.3 + a[1] * -1.7 + a[2] * 2.2, 1e-12);
}

TEST(XiRecursion, MissingJacobian) {
  auto cf = identity_chain();
  auto outer = cf.stage(1);
  outer.jacobian = nullptr;
  const CompositeFunctional broken({outer, cf.stage(2)}, {Box::unbounded(1)}, 1);
  const auto s = scalars({1, 2});
  EXPECT_THROW(xi_recursion(broken, mean_chain(broken, s), DirectionBundle::constant({{0.0}}, {1.0}), s),
               MissingJacobian);
}

// Property: xi is linear in the direction.
TEST(XiRecursion, LinearInDirection) {
  Xoshiro256 rng(99);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    for (const auto& cf : {semidev_with_boxes(s), smooth_chain()}) {
      const auto chain = mean_chain(cf, s);
      const double a = 4.0 * rng.uniform() - 2.0;
      const double b = 4.0 * rng.uniform() - 2.0;
      const double w = rng.uniform();
      auto d = DirectionBundle::zero(cf);
      auto e = DirectionBundle::zero(cf);
      for (double& t : d.terminal) t = rng.uniform() - 0.5;
      for (double& t : e.terminal) t = rng.uniform() - 0.5;
      // Nonconstant d_j: the recursion must evaluate them at mu_{j+1}.
      d.stage[0] = [w](std::span<const double> eta, std::span<double> out) { out[0] = std::sin(w + eta[0]); };
      e.stage[1] = [w](std::span<const double> eta, std::span<double> out) {
        for (double& o : out) o = w * eta[0];
      };
      const double lhs = xi_recursion(cf, chain, combine(a, d, b, e), s);
      const double rhs = a * xi_recursion(cf, chain, d, s) + b * xi_recursion(cf, chain, e, s);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(FiniteDiff, ZeroDirection) {
  const auto s = scalars({-1, 1, 3});
  const auto cf = semidev_with_boxes(s);
  EXPECT_EQ(finite_diff_directional(cf, s, DirectionBundle::zero(cf), 1e-6), 0.0);
}

TEST(FiniteDiff, IdentityChain) {
  const auto s = scalars({1, 5, 2});
  const auto cf = identity_chain();
  EXPECT_NEAR(finite_diff_directional(cf, s, DirectionBundle::constant({{0.0}}, {1.0}), 1e-6), 1.0, 1e-6);
}

TEST(FiniteDiff, MatchesRecursionOnTwoPoints) {
  const auto s = scalars({-1, 1});
  const auto cf = semidev_with_boxes(s);
  const auto d = DirectionBundle::constant({{0.0}, {0.0}}, {1.0});
  const double xi = xi_recursion(cf, mean_chain(cf, s), d, s);
  EXPECT_NEAR(finite_diff_directional(cf, s, d, 1e-6), xi, 1e-4 * std::abs(xi));
}

TEST(FiniteDiff, ErrorShrinksWithStep) {
  const auto s = riskclt::test::normal_sample(200, 4);
  const auto cf = semidev_with_boxes(s);
  const auto d = DirectionBundle::constant({{0.4}, {-0.2}}, {1.0});
  const double xi = xi_recursion(cf, mean_chain(cf, s), d, s);
  const double coarse = std::abs(finite_diff_directional(cf, s, d, 1e-2) - xi);
  const double fine = std::abs(finite_diff_directional(cf, s, d, 1e-5) - xi);
  EXPECT_LT(fine, coarse);
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
  const auto s = scalars({1, 2});
  const auto cf = identity_chain();
  EXPECT_THROW(finite_diff_directional(cf, s, DirectionBundle::zero(cf), 0.0), ParameterOutOfRange);
}

TEST(Jacobians, SemideviationMatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = riskclt::test::normal_sample(50, seed);
    EXPECT_LE(max_jacobian_error(semidev_with_boxes(s, 2.0, 0.5), s, 100, seed), 1e-5);
    EXPECT_LE(max_jacobian_error(semidev_with_boxes(s, 3.0, 0.8), s, 100, seed), 1e-5);
  }
}

TEST(Jacobians, SmoothChainMatchesCentralDifferences) {
  const auto s = riskclt::test::normal_sample(40, 8);
  EXPECT_LE(max_jacobian_error(smooth_chain(), s, 100, 3), 1e-5);
}

TEST(Jacobians, DetectsAWrongJacobian) {
  auto cf = smooth_chain();
  auto f1 = cf.stage(1);
  f1.jacobian = [](std::span<const double> eta, std::span<const double>, std::span<double> out) {
    out[0] = eta[0];
  };
  const CompositeFunctional wrong({f1, cf.stage(2), cf.stage(3)}, {cf.box(1), cf.box(2)}, 1);
  EXPECT_GT(max_jacobian_error(wrong, riskclt::test::normal_sample(40, 8), 20, 3), 1e-2);
}

// Property: the plug-in estimate converges for Normal(0,1), where rho = 0.5 sqrt(0.5).
TEST(EvaluatePlugin, ConsistencyInSampleSize) {
  auto median_error = [](std::size_t n) {
    std::vector<double> err;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto s = riskclt::test::normal_sample(n, derive_seed(77, n, seed));
      err.push_back(std::abs(evaluate_plugin(semidev_with_boxes(s), s) - kTwoPointSemidev));
    }
    std::nth_element(err.begin(), err.begin() + 25, err.end());
    return err[25];
  };
  EXPECT_LT(median_error(10000), median_error(100));
}
