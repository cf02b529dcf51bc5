#include "riskclt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskclt/error.hpp"
#include "riskclt/random.hpp"
#include "riskclt/risk_measures.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2
constexpr std::size_t kMaxSectionIterations = 400;
constexpr std::size_t kMaxPatternEvaluations = 200000;

double checked(double v, const char* who) {
  if (!std::isfinite(v)) throw SolverFailure(std::string(who) + ": objective returned a non-finite value");
  return v;
}

}  // namespace

SolveResult solve_1d_convex(const std::function<double(double)>& objective, Interval bracket, double tol) {
  if (!(bracket.lo <= bracket.hi) || !std::isfinite(bracket.lo) || !std::isfinite(bracket.hi)) {
    throw ParameterOutOfRange("solve_1d_convex: invalid bracket");
  }
  if (!(tol > 0.0)) throw ParameterOutOfRange("solve_1d_convex: tolerance must be positive");

  auto f = [&](double z) { return checked(objective(z), "solve_1d_convex"); };
  double a = bracket.lo;
  double b = bracket.hi;
  SolveResult result;
  if (b - a <= tol) {
    const double z = 0.5 * (a + b);
    result.minimizer = {z};
    result.value = f(z);
    return result;
  }

  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  std::size_t it = 0;
  while (b - a > tol && it < kMaxSectionIterations && c < d) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    ++it;
  }

  double z = 0.5 * (a + b);
  double fz = f(z);
  if (fc < fz) {
    z = c;
    fz = fc;
  }
  if (fd < fz) {
    z = d;
    fz = fd;
  }
  result.minimizer = {z};
  result.value = fz;
  result.iterations = it;
  return result;
}

SolveResult solve_low_dim(const std::function<double(std::span<const double>)>& objective, const Box& domain,
                          double tol, const LowDimOptions& options) {
  const std::size_t dim = domain.dim();
  if (dim == 0 || dim > 3) throw ParameterOutOfRange("solve_low_dim: decision dimension must be 1, 2 or 3");
  if (!domain.bounded()) throw ParameterOutOfRange("solve_low_dim: decision set must be a bounded box");
  for (std::size_t c = 0; c < dim; ++c) {
    if (domain.lower[c] > domain.upper[c]) throw ParameterOutOfRange("solve_low_dim: empty decision set");
  }
  if (!(tol > 0.0)) throw ParameterOutOfRange("solve_low_dim: tolerance must be positive");
  const std::size_t per_axis = std::max<std::size_t>(options.grid_per_axis, 1);

  auto f = [&](std::span<const double> u) { return checked(objective(u), "solve_low_dim"); };
  auto grid_coord = [&](std::size_t c, std::size_t i) {
    if (per_axis == 1) return 0.5 * (domain.lower[c] + domain.upper[c]);
    return domain.lower[c] +
           (domain.upper[c] - domain.lower[c]) * static_cast<double>(i) / static_cast<double>(per_axis - 1);
  };

  std::size_t total = 1;
  for (std::size_t c = 0; c < dim; ++c) total *= per_axis;

  std::vector<double> grid_points(total * dim);
  std::vector<double> grid_values(total);
  for (std::size_t g = 0; g < total; ++g) {
    std::size_t rest = g;
    for (std::size_t c = 0; c < dim; ++c) {
      grid_points[g * dim + c] = grid_coord(c, rest % per_axis);
      rest /= per_axis;
    }
    grid_values[g] = f(std::span<const double>(grid_points.data() + g * dim, dim));
  }
  const std::size_t best_grid =
      static_cast<std::size_t>(std::min_element(grid_values.begin(), grid_values.end()) - grid_values.begin());

  std::vector<double> x(grid_points.begin() + static_cast<std::ptrdiff_t>(best_grid * dim),
                        grid_points.begin() + static_cast<std::ptrdiff_t>((best_grid + 1) * dim));
  double fx = grid_values[best_grid];
  std::vector<double> step(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const double width = domain.upper[c] - domain.lower[c];
    step[c] = per_axis > 1 ? width / static_cast<double>(per_axis - 1) : 0.5 * width;
  }

  std::size_t evaluations = total;
  std::vector<double> trial(dim);
  while (*std::max_element(step.begin(), step.end()) > tol && evaluations < kMaxPatternEvaluations) {
    bool improved = false;
    for (std::size_t c = 0; c < dim; ++c) {
      for (double sign : {1.0, -1.0}) {
        if (step[c] == 0.0) continue;
        trial = x;
        trial[c] = std::clamp(x[c] + sign * step[c], domain.lower[c], domain.upper[c]);
        if (trial[c] == x[c]) continue;
        const double ft = f(trial);
        ++evaluations;
        if (ft < fx) {
          x = trial;
          fx = ft;
          improved = true;
        }
      }
    }
    if (!improved) {
      for (double& s : step) s *= 0.5;
    }
  }

  SolveResult result;
  result.minimizer = x;
  result.value = fx;
  result.iterations = evaluations;

  double norm = 0.0;
  for (double v : x) norm += v * v;
  const double tie_radius = 1e-6 * (1.0 + std::sqrt(norm));
  for (std::size_t g = 0; g < total && !result.tie; ++g) {
    double dist2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = grid_points[g * dim + c] - x[c];
      dist2 += diff * diff;
    }
    if (std::sqrt(dist2) > tie_radius && grid_values[g] - fx < 1e-10) result.tie = true;
  }

  Xoshiro256 rng(options.probe_seed);
  std::vector<double> probe(dim);
  for (std::size_t k = 0; k < options.certificate_probes; ++k) {
    for (std::size_t c = 0; c < dim; ++c) {
      probe[c] = domain.lower[c] + (domain.upper[c] - domain.lower[c]) * rng.uniform();
    }
    if (fx > f(probe) + 1e-12 * (1.0 + std::abs(fx))) result.certified = false;
  }
  return result;
}

std::vector<double> inner_mean(const OptimizedFunctional& problem, const SampleSet& s, std::span<const double> z) {
  const std::size_t n = s.size();
  const std::size_t width = problem.inner_dim;
  std::vector<double> buffer(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    problem.inner(z, s.row(i), std::span<double>(buffer.data() + i * width, width));
  }
  std::vector<double> mean(width);
  for (std::size_t c = 0; c < width; ++c) {
    mean[c] = pairwise_mean(n, [&](std::size_t i) { return buffer[i * width + c]; });
  }
  return mean;
}

double plugin_objective(const OptimizedFunctional& problem, const SampleSet& s, std::span<const double> z) {
  const auto eta = inner_mean(problem, s, z);
  return problem.outer(z, eta);
}

SolveResult solve_low_dim(const OptimizedFunctional& problem, const SampleSet& s, double tol,
                          const LowDimOptions& options) {
  return solve_low_dim([&](std::span<const double> z) { return plugin_objective(problem, s, z); },
                       problem.decision_set, tol, options);
}

SolveResult solve_low_dim(const NestedOptimizedFunctional& problem, const SampleSet& s, double tol,
                          const LowDimOptions& options) {
  return solve_low_dim(
      [&](std::span<const double> u) { return evaluate_plugin(problem.instantiate(u), s); },
      problem.decision_set, tol, options);
}

OptimizedFunctional avar_problem(double alpha, Interval decision_set) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterOutOfRange("AVaR level must lie in (0, 1]");
  OptimizedFunctional problem;
  problem.decision_set = Box::interval(decision_set.lo, decision_set.hi);
  problem.inner_dim = 1;
  problem.outer = [alpha](std::span<const double> z, std::span<const double> eta) {
    return z[0] + eta[0] / alpha;
  };
  problem.outer_gradient = [alpha](std::span<const double>, std::span<const double>, std::span<double> g) {
    g[0] = 1.0 / alpha;
  };
  problem.inner = [](std::span<const double> z, std::span<const double> x, std::span<double> out) {
    out[0] = std::max(0.0, x[0] - z[0]);
  };
  return problem;
}

OptimizedFunctional higher_order_problem(double p, double c, Interval decision_set) {
  if (!(p > 1.0) || !(c > 1.0)) throw ParameterOutOfRange("higher-order measure needs p > 1 and c > 1");
  OptimizedFunctional problem;
  problem.decision_set = Box::interval(decision_set.lo, decision_set.hi);
  problem.inner_dim = 1;
  problem.outer = [p, c](std::span<const double> z, std::span<const double> eta) {
    return z[0] + c * std::pow(eta[0], 1.0 / p);
  };
  problem.outer_gradient = [p, c](std::span<const double>, std::span<const double> eta, std::span<double> g) {
    g[0] = eta[0] > 0.0 ? (c / p) * std::pow(eta[0], 1.0 / p - 1.0) : 0.0;
  };
  problem.inner = [p](std::span<const double> z, std::span<const double> x, std::span<double> out) {
    out[0] = positive_part_pow(x[0] - z[0], p);
  };
  return problem;
}

}  // namespace riskclt
