#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "riskclt/distributions.hpp"
#include "riskclt/functional.hpp"
#include "riskclt/random.hpp"
#include "riskclt/sample_set.hpp"

namespace riskclt::test {

// k = 1: f1(eta, x) = eta, f2(x) = x, so rho is the mean.
inline CompositeFunctional identity_chain() {
  StageFunction outer;
  outer.input_dim = 1;
  outer.output_dim = 1;
  outer.evaluate = [](std::span<const double> eta, std::span<const double>, std::span<double> out) {
    out[0] = eta[0];
  };
  outer.jacobian = [](std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  StageFunction terminal;
  terminal.input_dim = 0;
  terminal.output_dim = 1;
  terminal.evaluate = [](std::span<const double>, std::span<const double> x, std::span<double> out) {
    out[0] = x[0];
  };
  return CompositeFunctional({outer, terminal}, {Box::unbounded(1)}, 1);
}

inline SampleSet scalars(std::vector<double> v) { return SampleSet::from_scalars(std::move(v)); }

inline SampleSet normal_sample(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  return sample(DistributionSpec::normal(mean, sd, n, seed));
}

// Random sample of modest size with a mix of shapes: normal, skewed, ties.
inline SampleSet random_sample(std::uint64_t seed) {
  Xoshiro256 rng(seed);
  const std::size_t n = 5 + static_cast<std::size_t>(rng() % 60);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n);
  const auto shape = seed % 3;
  for (auto& x : v) {
    const double g = z(rng);
    x = shape == 0 ? g : shape == 1 ? std::exp(g) : std::round(3.0 * g) / 2.0;
  }
  return SampleSet::from_scalars(std::move(v));
}

// Brute-force minimum of f over [lo, hi] on a uniform grid.
inline double grid_min(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  for (std::size_t i = 0; i <= steps; ++i) best = std::min(best, f(lo + step * static_cast<double>(i)));
  return best;
}

inline double population_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace riskclt::test
