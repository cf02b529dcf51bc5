#include "riskclt/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "riskclt/error.hpp"
#include "riskclt/risk_measures.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

namespace {

constexpr const char* kNonUniqueWarning =
    "non-unique minimizer: ties detected; the single-point limit formula is reported but the true limit is a "
    "minimum over the solution set";

// Covariance (1/n) of the rows of an n x dim residual buffer that is already centered.
Eigen::MatrixXd centered_covariance(const std::vector<double>& residuals, std::size_t n, std::size_t dim) {
  Eigen::MatrixXd cov(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = a; b < dim; ++b) {
      const double v = pairwise_mean(n, [&](std::size_t i) { return residuals[i * dim + a] * residuals[i * dim + b]; });
      cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return cov;
}

double quadratic_form(const Eigen::MatrixXd& m, const std::vector<double>& a) {
  const Eigen::Map<const Eigen::VectorXd> v(a.data(), static_cast<Eigen::Index>(a.size()));
  return v.dot(m * v);
}

}  // namespace

double CovarianceModel::block_entry(std::size_t bi, std::size_t bj, std::size_t r, std::size_t c) const {
  return matrix(static_cast<Eigen::Index>(offsets.at(bi) + r), static_cast<Eigen::Index>(offsets.at(bj) + c));
}

double CovarianceModel::min_eigenvalue() const {
  if (matrix.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool CovarianceModel::is_psd() const {
  if (matrix.size() == 0) return true;
  const double scale = 1.0 + matrix.cwiseAbs().maxCoeff();
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  if ((matrix.diagonal().array() < 0.0).any()) return false;
  return min_eigenvalue() >= -1e-10 * matrix.trace();
}

CovarianceModel covariance_empirical(const CompositeFunctional& cf, const SampleSet& s, const MeanChain& chain) {
  require_compatible(cf, s);
  const std::size_t k = cf.levels();
  if (chain.levels() != k) throw DimensionMismatch("mean chain does not match the functional");

  CovarianceModel model;
  model.n = s.size();
  model.offsets.push_back(0);
  for (std::size_t j = 1; j <= k + 1; ++j) {
    model.offsets.push_back(model.offsets.back() + cf.stage(j).output_dim);
    if (j <= k) {
      if (!cf.box(j).contains(chain.mu(j + 1))) {
        throw DomainEscape(j, "covariance evaluation point is outside the declared box");
      }
      model.points.push_back(chain.mu(j + 1));
    } else {
      model.points.emplace_back();
    }
  }

  const std::size_t dim = model.offsets.back();
  const std::size_t n = s.size();
  std::vector<double> residuals(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = s.row(i);
    for (std::size_t j = 1; j <= k + 1; ++j) {
      const auto& st = cf.stage(j);
      std::span<double> out(residuals.data() + i * dim + model.offsets[j - 1], st.output_dim);
      st.evaluate(model.points[j - 1], x, out);
      const auto& centre = chain.mu(j);
      for (std::size_t r = 0; r < st.output_dim; ++r) out[r] -= centre[r];
    }
  }
  model.matrix = centered_covariance(residuals, n, dim);
  return model;
}

CovarianceModel covariance_of(const SampleSet& s, std::size_t dim,
                              const std::function<void(std::span<const double> x, std::span<double> out)>& g) {
  const std::size_t n = s.size();
  std::vector<double> values(n * dim);
  for (std::size_t i = 0; i < n; ++i) g(s.row(i), std::span<double>(values.data() + i * dim, dim));
  std::vector<double> mean(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    mean[c] = pairwise_mean(n, [&](std::size_t i) { return values[i * dim + c]; });
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) values[i * dim + c] -= mean[c];
  }
  CovarianceModel model;
  model.n = n;
  model.points.push_back(std::move(mean));
  model.offsets = {0, dim};
  model.matrix = centered_covariance(values, n, dim);
  return model;
}

double limit_sd_composite(const CompositeFunctional& cf, const SampleSet& s) {
  const auto chain = mean_chain(cf, s);
  const auto coefficients = xi_coefficients(cf, chain, s);
  const auto cov = covariance_empirical(cf, s, chain);
  return std::sqrt(std::max(0.0, quadratic_form(cov.matrix, coefficients)));
}

RiskEstimate limit_sd_semideviation(const SampleSet& s, double p, double kappa) {
  s.require_scalar("limit_sd_semideviation");
  if (!(p > 1.0)) throw ParameterOutOfRange("semideviation limit needs p > 1");
  const auto cf = build_semideviation(p, kappa).with_boxes(semideviation_boxes(s, p));
  const auto chain = mean_chain(cf, s);
  const double mu2 = chain.mu(2)[0];
  const double mu3 = chain.mu(3)[0];
  if (kappa > 0.0 && !(mu2 > 0.0)) {
    throw DegenerateSample("semideviation limit undefined: sample has zero upper semideviation");
  }

  const auto cov = covariance_empirical(cf, s, chain);
  // V1 = W_3 (equivalently W_1), V2 = W_2(mu_3).
  const double var_v1 = cov.block_entry(2, 2);
  const double var_v2 = cov.block_entry(1, 1);
  const double cov_v12 = cov.block_entry(1, 2);

  const double slope = p * pairwise_mean(s.size(), [&](std::size_t i) { return positive_part_pow(s[i] - mu3, p - 1.0); });
  const double weight = kappa > 0.0 ? (kappa / p) * std::pow(mu2, (1.0 - p) / p) : 0.0;
  const double on_v1 = 1.0 - weight * slope;
  const double variance = on_v1 * on_v1 * var_v1 + 2.0 * on_v1 * weight * cov_v12 + weight * weight * var_v2;

  RiskEstimate est;
  est.measure = "semideviation";
  est.value = chain.value();
  est.n = s.size();
  est.limit_sd = std::sqrt(std::max(0.0, variance));
  return est;
}

RiskEstimate limit_sd_avar(const SampleSet& s, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterOutOfRange("AVaR limit needs alpha in (0, 1)");
  auto est = estimate_avar(s, alpha);
  const double z = est.minimizer.front();
  std::vector<double> excess(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) excess[i] = std::max(0.0, s[i] - z);
  est.limit_sd = std::sqrt(population_variance(excess)) / alpha;
  return est;
}

RiskEstimate limit_sd_higher_order(const SampleSet& s, double p, double c) {
  auto est = estimate_higher_order(s, p, c);
  const double z = est.minimizer.front();
  std::vector<double> powered(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) powered[i] = positive_part_pow(s[i] - z, p);
  const double moment = pairwise_mean(powered);
  if (!(moment > 0.0)) {
    throw DegenerateSample("higher-order limit undefined: no mass above the minimizer");
  }
  est.limit_sd = (c / p) * std::pow(moment, (1.0 - p) / p) * std::sqrt(population_variance(powered));
  return est;
}

RiskEstimate limit_sd_optimized(const OptimizedFunctional& problem, const SampleSet& s, const SolveResult& solution) {
  const std::span<const double> z = solution.minimizer;
  if (z.size() != problem.decision_set.dim()) throw DimensionMismatch("solution does not match the decision set");
  if (!problem.outer_gradient) throw MissingJacobian("optimized functional has no outer gradient");
  const auto eta = inner_mean(problem, s, z);
  std::vector<double> grad(problem.inner_dim);
  problem.outer_gradient(z, eta, grad);
  const auto cov = covariance_of(s, problem.inner_dim, [&](std::span<const double> x, std::span<double> out) {
    problem.inner(z, x, out);
  });

  RiskEstimate est;
  est.measure = "optimized";
  est.value = problem.outer(z, eta);
  est.n = s.size();
  est.minimizer.assign(z.begin(), z.end());
  est.limit_sd = std::sqrt(std::max(0.0, quadratic_form(cov.matrix, grad)));
  if (solution.tie) est.warnings.emplace_back(kNonUniqueWarning);
  return est;
}

RiskEstimate limit_sd_optimized(const OptimizedFunctional& problem, const SampleSet& s, double tol) {
  return limit_sd_optimized(problem, s, solve_low_dim(problem, s, tol));
}

RiskEstimate limit_sd_optimized(const NestedOptimizedFunctional& problem, const SampleSet& s,
                                const SolveResult& solution) {
  const auto cf = problem.instantiate(solution.minimizer);
  RiskEstimate est;
  est.measure = "nested-optimized";
  est.value = evaluate_plugin(cf, s);
  est.n = s.size();
  est.minimizer = solution.minimizer;
  est.limit_sd = limit_sd_composite(cf, s);
  if (solution.tie) est.warnings.emplace_back(kNonUniqueWarning);
  return est;
}

RiskEstimate limit_sd_optimized(const NestedOptimizedFunctional& problem, const SampleSet& s, double tol) {
  return limit_sd_optimized(problem, s, solve_low_dim(problem, s, tol));
}

SolveResult as_solution(const RiskEstimate& estimate) {
  SolveResult sol;
  sol.minimizer = estimate.minimizer;
  sol.value = estimate.value;
  sol.tie = std::any_of(estimate.warnings.begin(), estimate.warnings.end(),
                        [](const std::string& w) { return w.find("non-unique") != std::string::npos; });
  return sol;
}

}  // namespace riskclt
