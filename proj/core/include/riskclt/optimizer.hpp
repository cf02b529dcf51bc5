#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "riskclt/functional.hpp"
#include "riskclt/sample_set.hpp"

namespace riskclt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct SolveResult {
  std::vector<double> minimizer;
  double value = 0.0;
  std::size_t iterations = 0;
  /// Another point at distance > 1e-6 (1 + |z|) reached the optimal value
  /// within 1e-10.
  bool tie = false;
  /// The value did not exceed the objective at any certificate probe.
  bool certified = true;
};

/// Section search on a convex function: the bracket shrinks by the golden
/// ratio each iteration, reusing one interior evaluation, until its width is
/// at most tol. Throws SolverFailure on non-finite objective values.
SolveResult solve_1d_convex(const std::function<double(double)>& objective, Interval bracket, double tol);

/// min_{z in Z} f_1(z, E[f_2(z, X)]) with Z a box of dimension <= 3.
struct OptimizedFunctional {
  Box decision_set;
  std::size_t inner_dim = 1;
  std::function<double(std::span<const double> z, std::span<const double> eta)> outer;
  /// Gradient of f_1 in eta.
  std::function<void(std::span<const double> z, std::span<const double> eta, std::span<double> grad)>
      outer_gradient;
  std::function<void(std::span<const double> z, std::span<const double> x, std::span<double> out)> inner;
};

/// min_{u in U} of a composite functional whose stages depend on u.
struct NestedOptimizedFunctional {
  Box decision_set;
  std::function<CompositeFunctional(std::span<const double> u)> instantiate;
};

struct LowDimOptions {
  std::size_t grid_per_axis = 33;
  std::size_t certificate_probes = 32;
  std::uint64_t probe_seed = 0x5eed;
};

/// Mean of inner(z, X_i) over the sample.
std::vector<double> inner_mean(const OptimizedFunctional& problem, const SampleSet& s, std::span<const double> z);
double plugin_objective(const OptimizedFunctional& problem, const SampleSet& s, std::span<const double> z);

/// Grid of grid_per_axis^d points over U, then compass pattern search from
/// the best grid point until the step falls below tol.
SolveResult solve_low_dim(const std::function<double(std::span<const double>)>& objective, const Box& domain,
                          double tol, const LowDimOptions& options = {});
SolveResult solve_low_dim(const OptimizedFunctional& problem, const SampleSet& s, double tol,
                          const LowDimOptions& options = {});
SolveResult solve_low_dim(const NestedOptimizedFunctional& problem, const SampleSet& s, double tol,
                          const LowDimOptions& options = {});

/// AVaR and the higher-order measure cast as min_z f_1(z, E f_2(z, X)).
OptimizedFunctional avar_problem(double alpha, Interval decision_set);
OptimizedFunctional higher_order_problem(double p, double c, Interval decision_set);

}  // namespace riskclt
