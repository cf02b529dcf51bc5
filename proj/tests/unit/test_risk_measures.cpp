#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "riskclt/error.hpp"
#include "riskclt/functional.hpp"
#include "riskclt/risk_measures.hpp"
#include "support.hpp"

using namespace riskclt;
using riskclt::test::scalars;

namespace {

double sample_mean(const SampleSet& s) {
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return sum / static_cast<double>(s.size());
}

double hmcr_objective_direct(const std::vector<double>& x, double p, double c, double z) {
  double m = 0.0;
  for (double v : x) m += v > z ? std::pow(v - z, p) : 0.0;
  return z + c * std::pow(m / static_cast<double>(x.size()), 1.0 / p);
}

}  // namespace

TEST(MeasureSpec, ValidatesRanges) {
  EXPECT_THROW(MeasureSpec::semideviation(0.5, 0.5), ParameterOutOfRange);
  EXPECT_THROW(MeasureSpec::semideviation(2.0, 1.5), ParameterOutOfRange);
  EXPECT_THROW(MeasureSpec::avar(0.0), ParameterOutOfRange);
  EXPECT_THROW(MeasureSpec::avar(1.2), ParameterOutOfRange);
  EXPECT_THROW(MeasureSpec::higher_order(2.0, 1.0), ParameterOutOfRange);
  EXPECT_THROW(MeasureSpec::higher_order(0.9, 20.0), ParameterOutOfRange);
  EXPECT_NO_THROW(MeasureSpec::avar(1.0));
  EXPECT_NO_THROW(MeasureSpec::semideviation(1.0, 0.0));
}

TEST(MeasureSpec, OrderOneHigherOrderIsAVaR) {
  const auto spec = MeasureSpec::higher_order(1.0, 20.0);
  EXPECT_EQ(spec.kind, MeasureKind::AVaR);
  EXPECT_DOUBLE_EQ(spec.alpha, 0.05);
  EXPECT_EQ(spec.describe(), "avar(alpha=0.05)");
  EXPECT_EQ(MeasureSpec::higher_order(2.0, 20.0).describe(), "hmcr(p=2,c=20)");
  EXPECT_EQ(MeasureSpec::semideviation(1.5, 0.25).describe(), "semideviation(p=1.5,kappa=0.25)");
}

TEST(BuildSemideviation, KappaZeroIsTheMean) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    const auto cf = build_semideviation(2.0, 0.0).with_boxes(semideviation_boxes(s, 2.0));
    EXPECT_NEAR(evaluate_plugin(cf, s), sample_mean(s), 1e-12);
  }
}

TEST(BuildSemideviation, ConstantSample) {
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    for (double kappa : {0.0, 0.3, 1.0}) {
      EXPECT_EQ(estimate(MeasureSpec::semideviation(p, kappa), scalars({6.5, 6.5, 6.5})).value, 6.5);
    }
  }
}

TEST(BuildSemideviation, MatchesHandFormula) {
  const auto s = riskclt::test::normal_sample(500, 3, 1.0, 2.0);
  const double mean = sample_mean(s);
  for (double p : {1.0, 1.5, 3.0}) {
    double m = 0.0;
    for (double v : s.values()) m += v > mean ? std::pow(v - mean, p) : 0.0;
    const double expected = mean + 0.7 * std::pow(m / static_cast<double>(s.size()), 1.0 / p);
    EXPECT_NEAR(estimate(MeasureSpec::semideviation(p, 0.7), s).value, expected, 1e-12);
  }
}

TEST(BuildSemideviation, RejectsBadParameters) {
  EXPECT_THROW(build_semideviation(0.5, 0.5), ParameterOutOfRange);
  EXPECT_THROW(build_semideviation(2.0, -0.1), ParameterOutOfRange);
}

TEST(EstimateAVaR, FourPoints) {
  const auto est = estimate_avar(scalars({1, 2, 3, 4}), 0.5);
  EXPECT_DOUBLE_EQ(est.value, 3.5);
  ASSERT_EQ(est.minimizer.size(), 1u);
  // Flat empirical CDF on [2, 3): left endpoint and a non-uniqueness warning.
  EXPECT_EQ(est.minimizer[0], 2.0);
  ASSERT_EQ(est.warnings.size(), 1u);
  EXPECT_NE(est.warnings[0].find("non-unique"), std::string::npos);
}

TEST(EstimateAVaR, SingleAtomAndMean) {
  for (double a : {0.01, 0.5, 1.0}) EXPECT_EQ(estimate_avar(scalars({4.25}), a).value, 4.25);
  EXPECT_DOUBLE_EQ(estimate_avar(scalars({0, 1}), 1.0).value, 0.5);
}

TEST(EstimateAVaR, AgreesWithGridBruteForce) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    std::vector<double> x(s.values().begin(), s.values().end());
    for (double alpha : {0.05, 0.3, 0.9}) {
      auto f = [&](double z) {
        double t = 0.0;
        for (double v : x) t += std::max(0.0, v - z);
        return z + t / (alpha * static_cast<double>(x.size()));
      };
      // The minimum sits at an order statistic, so scanning them is exact.
      double best = std::numeric_limits<double>::infinity();
      for (double v : x) best = std::min(best, f(v));
      EXPECT_NEAR(estimate_avar(s, alpha).value, best, 1e-12 * (1.0 + std::abs(best)));
      const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
      EXPECT_GE(riskclt::test::grid_min(f, *lo - 1.0, *hi + 1.0, 1e-3), best - 1e-12);
    }
  }
}

TEST(EstimateAVaR, EqualsSortedTailAverage) {
  Xoshiro256 rng(2024);
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    const double alpha = 0.01 + 0.99 * rng.uniform();
    const double a = estimate_avar(s, alpha).value;
    EXPECT_NEAR(a, avar_tail_average(s, alpha), 1e-12 * (1.0 + std::abs(a))) << "seed " << seed;
  }
}

TEST(EstimateAVaR, RejectsBadAlpha) {
  EXPECT_THROW(estimate_avar(scalars({1, 2}), 0.0), ParameterOutOfRange);
  EXPECT_THROW(estimate_avar(SampleSet({1, 2}, 2), 0.5), DimensionMismatch);
}

TEST(EstimateHigherOrder, ConstantSample) {
  const auto est = estimate_higher_order(scalars({3, 3, 3}), 2.0, 20.0);
  EXPECT_EQ(est.value, 3.0);
  EXPECT_EQ(est.minimizer[0], 3.0);
}

// The last segment has slope 1 - c n^(-1/p), so small samples put the minimizer at the max.
TEST(EstimateHigherOrder, SmallSamplesSitAtTheMaximum) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = riskclt::test::normal_sample(50 + 10 * seed, seed);
    const double hi = *std::max_element(s.values().begin(), s.values().end());
    const auto est = estimate_higher_order(s, 2.0, 20.0);
    EXPECT_EQ(est.minimizer[0], hi);
    EXPECT_EQ(est.value, hi);
  }
}

TEST(EstimateHigherOrder, ThreePointsAgainstFineGrid) {
  const std::vector<double> x{0, 1, 2};
  const double grid = riskclt::test::grid_min([&](double z) { return hmcr_objective_direct(x, 2.0, 2.0, z); }, -1.0,
                                              3.0, 1e-5);
  EXPECT_NEAR(estimate_higher_order(scalars(x), 2.0, 2.0).value, grid, 1e-4);
}

TEST(EstimateHigherOrder, FirstOrderCondition) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto s = riskclt::test::random_sample(seed);
    std::vector<double> sorted(s.values().begin(), s.values().end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) continue;
    for (double p : {1.5, 2.0, 3.0}) {
      const auto est = estimate_higher_order(s, p, 5.0);
      const double z = est.minimizer[0];
      const double h = 1e-7;
      const double f0 = higher_order_objective(sorted, p, 5.0, z);
      const double right = (higher_order_objective(sorted, p, 5.0, z + h) - f0) / h;
      const double left = (f0 - higher_order_objective(sorted, p, 5.0, z - h)) / h;
      // Subgradient [left, right] must contain 0, up to solver tolerance.
      EXPECT_LE(left, 1e-3) << "seed " << seed << " p " << p;
      EXPECT_GE(right, -1e-3) << "seed " << seed << " p " << p;
    }
  }
}

TEST(EstimateHigherOrder, ContinuityAtOrderOne) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = riskclt::test::normal_sample(400, seed);
    const double a = estimate_avar(s, 0.1).value;
    const double h = estimate_higher_order(s, 1.0 + 1e-3, 10.0).value;
    EXPECT_LE(std::abs(h - a), 1e-2 * std::abs(a));
  }
}

TEST(EstimateHigherOrder, RejectsBadParameters) {
  EXPECT_THROW(estimate_higher_order(scalars({1, 2}), 1.0, 2.0), ParameterOutOfRange);
  EXPECT_THROW(estimate_higher_order(scalars({1, 2}), 2.0, 1.0), ParameterOutOfRange);
}

TEST(Coherence, Examples) {
  const auto s = riskclt::test::normal_sample(300, 5);
  EXPECT_LE(std::abs(coherence_check(MeasureSpec::semideviation(2.0, 0.5), s, 5.0, 2.0).translation), 1e-12);
  EXPECT_LE(std::abs(coherence_check(MeasureSpec::avar(0.1), s, 1.0, 3.0).homogeneity), 1e-9);
  const auto x = scalars({0, 1, 2, 3});
  const auto hmcr = MeasureSpec::higher_order(2.0, 2.0);
  EXPECT_LE(estimate(hmcr, x.affine(1.0, -1.0)).value, estimate(hmcr, x).value);
}

// Property: all four axioms hold at the sample level for every measure.
TEST(Coherence, RandomizedResiduals) {
  const std::vector<MeasureSpec> specs{MeasureSpec::semideviation(2.0, 0.5), MeasureSpec::semideviation(1.5, 1.0),
                                       MeasureSpec::avar(0.05), MeasureSpec::avar(0.5),
                                       MeasureSpec::higher_order(2.0, 20.0), MeasureSpec::higher_order(3.0, 4.0)};
  Xoshiro256 rng(31337);
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto s = riskclt::test::random_sample(seed);
      const double a = 10.0 * rng.uniform() - 5.0;
      const double lambda = 0.1 + 4.9 * rng.uniform();
      const auto r = coherence_check(spec, s, a, lambda);
      EXPECT_LE(std::abs(r.translation), 1e-8) << spec.describe() << " seed " << seed;
      EXPECT_LE(std::abs(r.homogeneity), 1e-8) << spec.describe() << " seed " << seed;
      EXPECT_LE(r.monotonicity, 1e-8) << spec.describe() << " seed " << seed;
      EXPECT_LE(r.convexity, 1e-8) << spec.describe() << " seed " << seed;
    }
  }
}

TEST(Coherence, RejectsNonPositiveLambda) {
  EXPECT_THROW(coherence_check(MeasureSpec::avar(0.5), scalars({1, 2}), 0.0, 0.0), ParameterOutOfRange);
}
