#include "riskclt/risk_measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskclt/error.hpp"
#include "riskclt/format.hpp"
#include "riskclt/optimizer.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

MeasureSpec MeasureSpec::semideviation(double p, double kappa) {
  MeasureSpec spec;
  spec.kind = MeasureKind::MeanSemideviation;
  spec.order = p;
  spec.kappa = kappa;
  spec.validate();
  return spec;
}

MeasureSpec MeasureSpec::avar(double alpha) {
  MeasureSpec spec;
  spec.kind = MeasureKind::AVaR;
  spec.alpha = alpha;
  spec.validate();
  return spec;
}

MeasureSpec MeasureSpec::higher_order(double p, double c) {
  if (!(c > 1.0)) throw ParameterOutOfRange("higher-order measure needs c > 1");
  if (p == 1.0) return avar(1.0 / c);
  MeasureSpec spec;
  spec.kind = MeasureKind::HigherOrderInverse;
  spec.order = p;
  spec.scale = c;
  spec.validate();
  return spec;
}

void MeasureSpec::validate() const {
  switch (kind) {
    case MeasureKind::MeanSemideviation:
      if (!(order >= 1.0) || !std::isfinite(order)) throw ParameterOutOfRange("semideviation order p must be >= 1");
      if (!(kappa >= 0.0 && kappa <= 1.0)) throw ParameterOutOfRange("semideviation weight kappa must lie in [0, 1]");
      break;
    case MeasureKind::AVaR:
      if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterOutOfRange("AVaR level alpha must lie in (0, 1]");
      break;
    case MeasureKind::HigherOrderInverse:
      if (!(order > 1.0) || !std::isfinite(order)) throw ParameterOutOfRange("higher-order measure needs p > 1");
      if (!(scale > 1.0) || !std::isfinite(scale)) throw ParameterOutOfRange("higher-order measure needs c > 1");
      break;
  }
}

std::string MeasureSpec::name() const {
  switch (kind) {
    case MeasureKind::MeanSemideviation:
      return "semideviation";
    case MeasureKind::AVaR:
      return "avar";
    case MeasureKind::HigherOrderInverse:
      return "hmcr";
  }
  return "unknown";
}

std::string MeasureSpec::describe() const {
  std::ostringstream out;
  out << name() << '(';
  switch (kind) {
    case MeasureKind::MeanSemideviation:
      out << "p=" << shortest(order) << ",kappa=" << shortest(kappa);
      break;
    case MeasureKind::AVaR:
      out << "alpha=" << shortest(alpha);
      break;
    case MeasureKind::HigherOrderInverse:
      out << "p=" << shortest(order) << ",c=" << shortest(scale);
      break;
  }
  out << ')';
  return out.str();
}

double positive_part_pow(double d, double p) noexcept {
  if (!(d > 0.0)) return 0.0;
  if (p == 2.0) return d * d;
  if (p == 1.0) return d;
  return std::pow(d, p);
}

CompositeFunctional build_semideviation(double p, double kappa) {
  return build_semideviation(p, kappa, [](std::span<const double> x) { return x[0]; }, 1);
}

CompositeFunctional build_semideviation(double p, double kappa, LossFunction loss, std::size_t observation_dim) {
  MeasureSpec::semideviation(p, kappa);
  const double inv_p = 1.0 / p;

  StageFunction outer;
  outer.input_dim = 1;
  outer.output_dim = 1;
  outer.evaluate = [loss, kappa, inv_p](std::span<const double> eta, std::span<const double> x,
                                        std::span<double> out) {
    out[0] = loss(x) + kappa * std::pow(eta[0], inv_p);
  };
  outer.jacobian = [kappa, inv_p](std::span<const double> eta, std::span<const double>, std::span<double> out) {
    // Zero semideviation: the composite term vanishes, and so does its slope by convention.
    out[0] = eta[0] > 0.0 ? kappa * inv_p * std::pow(eta[0], inv_p - 1.0) : 0.0;
  };

  StageFunction deviation;
  deviation.input_dim = 1;
  deviation.output_dim = 1;
  deviation.evaluate = [loss, p](std::span<const double> eta, std::span<const double> x, std::span<double> out) {
    out[0] = positive_part_pow(loss(x) - eta[0], p);
  };
  deviation.jacobian = [loss, p](std::span<const double> eta, std::span<const double> x, std::span<double> out) {
    out[0] = -p * positive_part_pow(loss(x) - eta[0], p - 1.0);
  };

  StageFunction terminal;
  terminal.input_dim = 0;
  terminal.output_dim = 1;
  terminal.evaluate = [loss](std::span<const double>, std::span<const double> x, std::span<double> out) {
    out[0] = loss(x);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  return CompositeFunctional({std::move(outer), std::move(deviation), std::move(terminal)},
                             {Box::interval(0.0, inf), Box::unbounded(1)}, observation_dim);
}

std::vector<Box> semideviation_boxes(const SampleSet& s, double p) {
  s.require_scalar("semideviation_boxes");
  const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
  const double range = *hi - *lo;
  return {Box::interval(0.0, 8.0 * std::pow(range, p)), Box::interval(*lo - 3.0 * range, *hi + 3.0 * range)};
}

namespace {

std::vector<double> sorted_copy(const SampleSet& s) {
  std::vector<double> v(s.values().begin(), s.values().end());
  std::sort(v.begin(), v.end());
  return v;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterOutOfRange("AVaR level alpha must lie in (0, 1]");
}

}  // namespace

RiskEstimate estimate_avar(const SampleSet& s, double alpha) {
  s.require_scalar("estimate_avar");
  require_alpha(alpha);
  const auto sorted = sorted_copy(s);
  const std::size_t n = sorted.size();
  const double tail_mass = alpha * static_cast<double>(n);

  // Smallest order statistic index j (1-based) with n - j <= alpha n.
  const double lower_index = std::ceil(static_cast<double>(n) - tail_mass - 1e-9);
  const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(lower_index, 1.0)), 1, n);
  const double z = sorted[j - 1];

  const auto first_above =
      static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin());
  const double excess = pairwise_sum(first_above, n, [&](std::size_t i) { return sorted[i] - z; });

  RiskEstimate est;
  est.measure = "avar";
  est.n = n;
  est.value = z + excess / tail_mass;
  est.minimizer = {z};
  const double above = static_cast<double>(n - first_above);
  if (first_above < n && std::abs(above - tail_mass) < 1e-9) {
    est.warnings.push_back("non-unique minimizer: empirical CDF is flat at level 1 - alpha");
  }
  return est;
}

double avar_tail_average(const SampleSet& s, double alpha) {
  s.require_scalar("avar_tail_average");
  require_alpha(alpha);
  const auto sorted = sorted_copy(s);
  const double n = static_cast<double>(sorted.size());
  const double level = 1.0 - alpha;
  const double total = pairwise_sum(0, sorted.size(), [&](std::size_t i) {
    const double left = std::max(static_cast<double>(i) / n, level);
    const double right = static_cast<double>(i + 1) / n;
    return right > left ? (right - left) * sorted[i] : 0.0;
  });
  return total / alpha;
}

double higher_order_objective(std::span<const double> sorted, double p, double c, double z) {
  const auto first =
      static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin());
  const double tail = pairwise_sum(first, sorted.size(), [&](std::size_t i) {
    return positive_part_pow(sorted[i] - z, p);
  });
  const double moment = tail / static_cast<double>(sorted.size());
  return z + c * (p == 2.0 ? std::sqrt(moment) : std::pow(moment, 1.0 / p));
}

namespace {

// Right derivative of the objective; nondecreasing in z because the objective is convex.
double higher_order_slope(std::span<const double> sorted, double p, double c, double z) {
  const auto first =
      static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin());
  if (first == sorted.size()) return 1.0;
  const double mp =
      pairwise_sum(first, sorted.size(), [&](std::size_t i) { return positive_part_pow(sorted[i] - z, p); });
  const double mq =
      pairwise_sum(first, sorted.size(), [&](std::size_t i) { return positive_part_pow(sorted[i] - z, p - 1.0); });
  const double n = static_cast<double>(sorted.size());
  return 1.0 - c * (mq / n) / std::pow(mp / n, (p - 1.0) / p);
}

// Bisection on the sign of the slope down to adjacent doubles.
double polish_higher_order(std::span<const double> sorted, double p, double c, double z, double width,
                           Interval bracket) {
  double a = std::max(bracket.lo, z - width);
  double b = std::min(bracket.hi, z + width);
  if (higher_order_slope(sorted, p, c, a) >= 0.0) a = bracket.lo;
  if (higher_order_slope(sorted, p, c, b) < 0.0) b = bracket.hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = a + 0.5 * (b - a);
    if (mid <= a || mid >= b) break;
    (higher_order_slope(sorted, p, c, mid) < 0.0 ? a : b) = mid;
  }
  return b;
}

}  // namespace

RiskEstimate estimate_higher_order(const SampleSet& s, double p, double c) {
  s.require_scalar("estimate_higher_order");
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterOutOfRange("higher-order measure needs p > 1");
  if (!(c > 1.0) || !std::isfinite(c)) throw ParameterOutOfRange("higher-order measure needs c > 1");
  const auto sorted = sorted_copy(s);
  RiskEstimate est;
  est.measure = "hmcr";
  est.n = sorted.size();

  const double lo = sorted.front();
  const double hi = sorted.back();
  if (lo == hi) {
    est.value = lo;
    est.minimizer = {lo};
    return est;
  }
  const double range = hi - lo;
  const Interval bracket{lo - 1.0, hi + c * range};
  const double tol = 1e-9 * (1.0 + std::max(std::abs(bracket.lo), std::abs(bracket.hi)));
  const auto solved = solve_1d_convex(
      [&](double z) { return higher_order_objective(sorted, p, c, z); }, bracket, tol);
  est.value = solved.value;
  est.minimizer = solved.minimizer;
  const double z = polish_higher_order(sorted, p, c, solved.minimizer[0], 16.0 * tol, bracket);
  const double fz = higher_order_objective(sorted, p, c, z);
  if (fz <= est.value) {
    est.value = fz;
    est.minimizer = {z};
  }
  return est;
}

RiskEstimate estimate(const MeasureSpec& spec, const SampleSet& s) {
  spec.validate();
  switch (spec.kind) {
    case MeasureKind::MeanSemideviation: {
      s.require_scalar("semideviation estimate");
      const auto cf = build_semideviation(spec.order, spec.kappa).with_boxes(semideviation_boxes(s, spec.order));
      RiskEstimate est;
      est.measure = "semideviation";
      est.n = s.size();
      est.value = evaluate_plugin(cf, s);
      return est;
    }
    case MeasureKind::AVaR:
      return estimate_avar(s, spec.alpha);
    case MeasureKind::HigherOrderInverse:
      return estimate_higher_order(s, spec.order, spec.scale);
  }
  throw ParameterOutOfRange("unknown measure kind");
}

CoherenceReport coherence_check(const MeasureSpec& spec, const SampleSet& s, double shift, double lambda) {
  if (!(lambda > 0.0)) throw ParameterOutOfRange("coherence_check: lambda must be positive");
  s.require_scalar("coherence_check");
  const std::size_t n = s.size();
  auto rho = [&](const SampleSet& x) { return estimate(spec, x).value; };

  const double base = rho(s);
  CoherenceReport report;
  report.translation = rho(s.affine(1.0, shift)) - base - shift;
  report.homogeneity = rho(s.affine(lambda, 0.0)) - lambda * base;

  std::vector<double> dominated(n);
  std::vector<double> reversed(n);
  std::vector<double> mixture(n);
  const double gap = 1.0 + std::abs(shift);
  for (std::size_t i = 0; i < n; ++i) {
    dominated[i] = s[i] - gap * static_cast<double>(i % 3) / 2.0;
    reversed[i] = s[n - 1 - i];
    mixture[i] = 0.5 * s[i] + 0.5 * reversed[i];
  }
  const SampleSet reversed_set = SampleSet::from_scalars(std::move(reversed));
  report.monotonicity = std::max(0.0, rho(SampleSet::from_scalars(std::move(dominated))) - base);
  report.convexity =
      std::max(0.0, rho(SampleSet::from_scalars(std::move(mixture))) - 0.5 * base - 0.5 * rho(reversed_set));
  return report;
}

}  // namespace riskclt
