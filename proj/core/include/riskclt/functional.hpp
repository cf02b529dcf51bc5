#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "riskclt/sample_set.hpp"

namespace riskclt {

/// Compact axis-aligned box. Infinite bounds are allowed for boxes that are
/// only used as membership checks.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unbounded(std::size_t dim);
  static Box interval(double lo, double hi) { return Box{{lo}, {hi}}; }

  std::size_t dim() const noexcept { return lower.size(); }
  bool contains(std::span<const double> point) const noexcept;
  bool bounded() const noexcept;
};

/// out = f(eta, x). The terminal stage ignores `eta` (it is empty).
using StageEvaluator =
    std::function<void(std::span<const double> eta, std::span<const double> x, std::span<double> out)>;
/// out = d f / d eta at (eta, x), row-major with output_dim rows and input_dim columns.
using StageJacobian = StageEvaluator;

/// One level f_j of a composite functional.
///
/// Stage j (1-based, j <= k) maps (eta, x) in R^{m_j} x R^m to R^{m_{j-1}};
/// the terminal stage k+1 maps x alone to R^{m_k} and has input_dim == 0.
struct StageFunction {
  std::size_t input_dim = 0;
  std::size_t output_dim = 1;
  StageEvaluator evaluate;
  StageJacobian jacobian;
};

/// rho(X) = E[f_1(E[f_2(... E[f_{k+1}(X)] ..., X)], X)].
///
/// Stages are stored outermost first: stage(1) is f_1, stage(k+1) is the
/// terminal map. box(j) is the declared domain I_j that must contain
/// mu_{j+1}.
class CompositeFunctional {
 public:
  CompositeFunctional(std::vector<StageFunction> stages, std::vector<Box> boxes,
                      std::size_t observation_dim);

  std::size_t levels() const noexcept { return stages_.size() - 1; }
  std::size_t observation_dim() const noexcept { return observation_dim_; }
  const StageFunction& stage(std::size_t j) const { return stages_.at(j - 1); }
  const Box& box(std::size_t j) const { return boxes_.at(j - 1); }

  CompositeFunctional with_boxes(std::vector<Box> boxes) const;

 private:
  std::vector<StageFunction> stages_;
  std::vector<Box> boxes_;
  std::size_t observation_dim_;
};

/// mu_{k+1}, ..., mu_1 under one measure. mu(j) is 1-based, j in 1..k+1;
/// mu(1) has a single entry, the functional value.
class MeanChain {
 public:
  explicit MeanChain(std::vector<std::vector<double>> levels) : levels_(std::move(levels)) {}
  const std::vector<double>& mu(std::size_t j) const { return levels_.at(j - 1); }
  std::size_t levels() const noexcept { return levels_.size() - 1; }
  double value() const { return levels_.front().front(); }

 private:
  std::vector<std::vector<double>> levels_;
};

/// A direction d = (d_1, ..., d_k, d_{k+1}) in the space of stage means:
/// d_j is a function on I_j valued in R^{m_{j-1}}, d_{k+1} a vector in R^{m_k}.
struct DirectionBundle {
  using Component = std::function<void(std::span<const double> eta, std::span<double> out)>;

  std::vector<Component> stage;  // d_1 .. d_k
  std::vector<double> terminal;  // d_{k+1}

  static DirectionBundle zero(const CompositeFunctional& cf);
  /// Each d_j is the constant function stage_values[j-1].
  static DirectionBundle constant(std::vector<std::vector<double>> stage_values,
                                  std::vector<double> terminal);
};

/// alpha * d + beta * e.
DirectionBundle combine(double alpha, const DirectionBundle& d, double beta, const DirectionBundle& e);

/// Checks that the sample matches the functional's observation dimension.
void require_compatible(const CompositeFunctional& cf, const SampleSet& s);

/// Empirical mean chain; throws DomainEscape(j) when mu_{j+1} leaves I_j.
MeanChain mean_chain(const CompositeFunctional& cf, const SampleSet& s);

/// Plug-in estimate rho^(n): the nested empirical means. Identical to
/// mean_chain(cf, s).value().
double evaluate_plugin(const CompositeFunctional& cf, const SampleSet& s);

/// xi_1(d) from the backward recursion
///   xi_{k+1} = d_{k+1},
///   xi_j = E_n[f'_j(mu_{j+1}, X)] xi_{j+1} + d_j(mu_{j+1}).
double xi_recursion(const CompositeFunctional& cf, const MeanChain& chain, const DirectionBundle& d,
                    const SampleSet& s);

/// Coefficients of xi_1 as a linear form in the point values
/// (d_1(mu_2), ..., d_k(mu_{k+1}), d_{k+1}), stacked in that order.
std::vector<double> xi_coefficients(const CompositeFunctional& cf, const MeanChain& chain,
                                    const SampleSet& s);

/// [Psi(h + t d) - Psi(h)] / t with h the empirical stage means. Test oracle
/// for xi_recursion.
double finite_diff_directional(const CompositeFunctional& cf, const SampleSet& s,
                               const DirectionBundle& d, double t);

/// Largest relative discrepancy between declared Jacobians and central
/// differences of the evaluators, over `probes` random eta points drawn
/// inside each (bounded) box and x taken from the sample rows.
double max_jacobian_error(const CompositeFunctional& cf, const SampleSet& s, std::size_t probes,
                          std::uint64_t seed);

}  // namespace riskclt
