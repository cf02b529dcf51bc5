#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "riskclt/functional.hpp"
#include "riskclt/optimizer.hpp"
#include "riskclt/risk_estimate.hpp"
#include "riskclt/sample_set.hpp"

namespace riskclt {

/// Plug-in covariance of the Gaussian limit W at the points the limit
/// formulas need.
///
/// For a composite functional the blocks are W_1(mu_2), ..., W_k(mu_{k+1}),
/// W_{k+1}, in that order; block j has dimension m_{j-1}. For an optimized
/// functional there is a single block W(z_hat). Normalization is 1/n.
struct CovarianceModel {
  std::vector<std::vector<double>> points;  // evaluation point of each block (empty for W_{k+1})
  std::vector<std::size_t> offsets;         // block start rows, plus the total dimension at the end
  Eigen::MatrixXd matrix;
  std::size_t n = 0;

  std::size_t blocks() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  /// Entry (r, c) of block (bi, bj), all 0-based.
  double block_entry(std::size_t bi, std::size_t bj, std::size_t r = 0, std::size_t c = 0) const;
  double min_eigenvalue() const;
  /// Symmetric, nonnegative diagonal, and eigenvalues >= -1e-10 trace.
  bool is_psd() const;
};

CovarianceModel covariance_empirical(const CompositeFunctional& cf, const SampleSet& s, const MeanChain& chain);

/// Covariance of g(X) for a vector-valued g of dimension `dim`.
CovarianceModel covariance_of(const SampleSet& s, std::size_t dim,
                              const std::function<void(std::span<const double> x, std::span<double> out)>& g);

/// sqrt(a' C a) with a the xi-recursion coefficients and C the stacked
/// covariance; the limit sd of any composite functional.
double limit_sd_composite(const CompositeFunctional& cf, const SampleSet& s);

/// Closed-form delta-method sd for the mean-semideviation, from the (V_1, V_2)
/// block of covariance_empirical.
RiskEstimate limit_sd_semideviation(const SampleSet& s, double p, double kappa);

/// (1/alpha) sd(max(0, X - z_hat)).
RiskEstimate limit_sd_avar(const SampleSet& s, double alpha);

/// (c/p) m^{(1-p)/p} sd(max(0, X - z_hat)^p), m = E_n max(0, X - z_hat)^p.
RiskEstimate limit_sd_higher_order(const SampleSet& s, double p, double c);

/// sd of <grad f_1(z_hat, E_n f_2(z_hat, X)), f_2(z_hat, X)> at a given solution.
RiskEstimate limit_sd_optimized(const OptimizedFunctional& problem, const SampleSet& s, const SolveResult& solution);
/// Solves with solve_low_dim first.
RiskEstimate limit_sd_optimized(const OptimizedFunctional& problem, const SampleSet& s, double tol);

/// Nested form: the xi-recursion of the functional instantiated at u_hat.
RiskEstimate limit_sd_optimized(const NestedOptimizedFunctional& problem, const SampleSet& s,
                                const SolveResult& solution);
RiskEstimate limit_sd_optimized(const NestedOptimizedFunctional& problem, const SampleSet& s, double tol);

/// A 1-D estimate's minimizer repackaged for limit_sd_optimized.
SolveResult as_solution(const RiskEstimate& estimate);

}  // namespace riskclt
