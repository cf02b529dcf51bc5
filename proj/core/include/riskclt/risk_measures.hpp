#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskclt/functional.hpp"
#include "riskclt/risk_estimate.hpp"
#include "riskclt/sample_set.hpp"

namespace riskclt {

enum class MeasureKind { MeanSemideviation, AVaR, HigherOrderInverse };

/// Parameters of one of the shipped measures. Build through the named
/// constructors, which validate ranges.
struct MeasureSpec {
  MeasureKind kind = MeasureKind::AVaR;
  double order = 1.0;   // p, semideviation and higher-order
  double kappa = 0.0;   // semideviation weight
  double alpha = 1.0;   // AVaR level
  double scale = 1.0;   // higher-order c = 1/alpha

  static MeasureSpec semideviation(double p, double kappa);
  static MeasureSpec avar(double alpha);
  /// p == 1 yields AVaR at level 1/c.
  static MeasureSpec higher_order(double p, double c);

  void validate() const;
  std::string name() const;
  /// name() plus parameters, e.g. "hmcr(p=2,c=20)".
  std::string describe() const;
};

/// Scalar loss extracted from an observation; the default takes x[0].
using LossFunction = std::function<double(std::span<const double> x)>;

/// max(0, d)^p, with 0 at and left of the kink.
double positive_part_pow(double d, double p) noexcept;

/// Mean-semideviation of order p as the k = 2 chain
///   f_1(eta, x) = L(x) + kappa eta^{1/p},
///   f_2(eta, x) = max(0, L(x) - eta)^p,
///   f_3(x) = L(x),
/// with unbounded boxes I_2 = R, I_1 = [0, inf).
CompositeFunctional build_semideviation(double p, double kappa);
CompositeFunctional build_semideviation(double p, double kappa, LossFunction loss, std::size_t observation_dim);

/// Default boxes for a scalar sample: I_2 = [min - 3r, max + 3r],
/// I_1 = [0, 8 r^p], r the sample range.
std::vector<Box> semideviation_boxes(const SampleSet& s, double p);

/// Empirical AVaR by its minimization form; the minimizer is the left end of
/// the optimal interval (the lower empirical (1-alpha)-quantile).
RiskEstimate estimate_avar(const SampleSet& s, double alpha);

/// (1/alpha) * integral over [1-alpha, 1] of the empirical quantile function.
double avar_tail_average(const SampleSet& s, double alpha);

/// z + c (mean of max(0, X_i - z)^p)^{1/p}, evaluated in O(tail) on a sorted sample.
double higher_order_objective(std::span<const double> sorted, double p, double c, double z);

/// min_z z + c (E_n max(0, X - z)^p)^{1/p} via convex 1-D search.
RiskEstimate estimate_higher_order(const SampleSet& s, double p, double c);

/// Estimate of any shipped measure on a scalar sample.
RiskEstimate estimate(const MeasureSpec& spec, const SampleSet& s);

/// Axiom residuals of the estimator at the sample level.
struct CoherenceReport {
  double translation = 0.0;   // rho(X + a) - rho(X) - a
  double homogeneity = 0.0;   // rho(lambda X) - lambda rho(X)
  double monotonicity = 0.0;  // max(0, rho(Y) - rho(X)) for Y <= X pointwise
  double convexity = 0.0;     // max(0, rho(X/2 + Y/2) - rho(X)/2 - rho(Y)/2)
};

CoherenceReport coherence_check(const MeasureSpec& spec, const SampleSet& s, double shift, double lambda);

}  // namespace riskclt
