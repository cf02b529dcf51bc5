#include "riskclt/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskclt/error.hpp"
#include "riskclt/random.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

Box Box::unbounded(std::size_t dim) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Box{std::vector<double>(dim, -inf), std::vector<double>(dim, inf)};
}

bool Box::contains(std::span<const double> point) const noexcept {
  if (point.size() != lower.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    // NaN fails both comparisons and is reported as outside.
    if (!(point[i] >= lower[i] && point[i] <= upper[i])) return false;
  }
  return true;
}

bool Box::bounded() const noexcept {
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
  }
  return true;
}

CompositeFunctional::CompositeFunctional(std::vector<StageFunction> stages, std::vector<Box> boxes,
                                         std::size_t observation_dim)
    : stages_(std::move(stages)), boxes_(std::move(boxes)), observation_dim_(observation_dim) {
  if (stages_.size() < 2) throw DimensionMismatch("composite functional needs k >= 1 (at least two stages)");
  if (observation_dim_ == 0) throw DimensionMismatch("observation dimension must be positive");
  const std::size_t k = stages_.size() - 1;
  if (boxes_.size() != k) {
    throw DimensionMismatch("expected " + std::to_string(k) + " domain boxes, got " +
                            std::to_string(boxes_.size()));
  }
  if (stages_.front().output_dim != 1) throw DimensionMismatch("stage 1 must be scalar valued");
  if (stages_.back().input_dim != 0) throw DimensionMismatch("terminal stage takes no mean input");
  for (std::size_t j = 1; j <= k; ++j) {
    const auto& outer = stages_[j - 1];
    const auto& inner = stages_[j];
    if (outer.input_dim != inner.output_dim) {
      throw DimensionMismatch("stage " + std::to_string(j) + " expects input of dimension " +
                              std::to_string(outer.input_dim) + " but stage " + std::to_string(j + 1) +
                              " produces " + std::to_string(inner.output_dim));
    }
    if (boxes_[j - 1].dim() != outer.input_dim || boxes_[j - 1].upper.size() != outer.input_dim) {
      throw DimensionMismatch("box I_" + std::to_string(j) + " has the wrong dimension");
    }
  }
  for (const auto& st : stages_) {
    if (!st.evaluate) throw DimensionMismatch("stage without an evaluator");
    if (st.output_dim == 0) throw DimensionMismatch("stage with zero output dimension");
  }
}

CompositeFunctional CompositeFunctional::with_boxes(std::vector<Box> boxes) const {
  return CompositeFunctional(stages_, std::move(boxes), observation_dim_);
}

DirectionBundle DirectionBundle::zero(const CompositeFunctional& cf) {
  DirectionBundle d;
  for (std::size_t j = 1; j <= cf.levels(); ++j) {
    d.stage.emplace_back([](std::span<const double>, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
    });
  }
  d.terminal.assign(cf.stage(cf.levels() + 1).output_dim, 0.0);
  return d;
}

DirectionBundle DirectionBundle::constant(std::vector<std::vector<double>> stage_values,
                                          std::vector<double> terminal) {
  DirectionBundle d;
  for (auto& v : stage_values) {
    d.stage.emplace_back([v = std::move(v)](std::span<const double>, std::span<double> out) {
      std::copy(v.begin(), v.end(), out.begin());
    });
  }
  d.terminal = std::move(terminal);
  return d;
}

DirectionBundle combine(double alpha, const DirectionBundle& d, double beta, const DirectionBundle& e) {
  if (d.stage.size() != e.stage.size() || d.terminal.size() != e.terminal.size()) {
    throw DimensionMismatch("cannot combine direction bundles of different shapes");
  }
  DirectionBundle out;
  for (std::size_t j = 0; j < d.stage.size(); ++j) {
    out.stage.emplace_back([alpha, beta, dj = d.stage[j], ej = e.stage[j]](std::span<const double> eta,
                                                                           std::span<double> o) {
      std::vector<double> tmp(o.size());
      dj(eta, o);
      ej(eta, tmp);
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = alpha * o[i] + beta * tmp[i];
    });
  }
  out.terminal.resize(d.terminal.size());
  for (std::size_t i = 0; i < d.terminal.size(); ++i) {
    out.terminal[i] = alpha * d.terminal[i] + beta * e.terminal[i];
  }
  return out;
}

void require_compatible(const CompositeFunctional& cf, const SampleSet& s) {
  if (s.dim() != cf.observation_dim()) {
    throw DimensionMismatch("sample dimension " + std::to_string(s.dim()) +
                            " does not match functional observation dimension " +
                            std::to_string(cf.observation_dim()));
  }
}

namespace {

// Column-wise pairwise mean of n rows of width `width` produced by fill(i, row).
template <class Fill>
std::vector<double> empirical_mean(std::size_t n, std::size_t width, const Fill& fill) {
  std::vector<double> buffer(n * width);
  for (std::size_t i = 0; i < n; ++i) fill(i, std::span<double>(buffer.data() + i * width, width));
  std::vector<double> mean(width);
  for (std::size_t c = 0; c < width; ++c) {
    mean[c] = pairwise_mean(n, [&](std::size_t i) { return buffer[i * width + c]; });
  }
  return mean;
}

std::vector<double> stage_mean(const StageFunction& st, std::span<const double> eta, const SampleSet& s) {
  return empirical_mean(s.size(), st.output_dim,
                        [&](std::size_t i, std::span<double> out) { st.evaluate(eta, s.row(i), out); });
}

// Empirical mean Jacobian, row-major output_dim x input_dim.
std::vector<double> mean_jacobian(const StageFunction& st, std::size_t j, std::span<const double> eta,
                                  const SampleSet& s) {
  if (!st.jacobian) throw MissingJacobian("stage " + std::to_string(j) + " has no Jacobian");
  return empirical_mean(s.size(), st.output_dim * st.input_dim,
                        [&](std::size_t i, std::span<double> out) { st.jacobian(eta, s.row(i), out); });
}

void check_in_box(const CompositeFunctional& cf, std::size_t j, std::span<const double> point) {
  if (!cf.box(j).contains(point)) {
    std::string coords;
    for (double v : point) coords += (coords.empty() ? "" : ", ") + std::to_string(v);
    throw DomainEscape(j, "mean (" + coords + ") is outside the declared box");
  }
}

}  // namespace

MeanChain mean_chain(const CompositeFunctional& cf, const SampleSet& s) {
  require_compatible(cf, s);
  const std::size_t k = cf.levels();
  std::vector<std::vector<double>> levels(k + 1);
  levels[k] = stage_mean(cf.stage(k + 1), {}, s);
  for (std::size_t j = k; j >= 1; --j) {
    check_in_box(cf, j, levels[j]);
    levels[j - 1] = stage_mean(cf.stage(j), levels[j], s);
  }
  return MeanChain(std::move(levels));
}

double evaluate_plugin(const CompositeFunctional& cf, const SampleSet& s) { return mean_chain(cf, s).value(); }

double xi_recursion(const CompositeFunctional& cf, const MeanChain& chain, const DirectionBundle& d,
                    const SampleSet& s) {
  require_compatible(cf, s);
  const std::size_t k = cf.levels();
  if (d.stage.size() != k || d.terminal.size() != cf.stage(k + 1).output_dim) {
    throw DimensionMismatch("direction bundle does not match the functional");
  }
  std::vector<double> xi = d.terminal;
  for (std::size_t j = k; j >= 1; --j) {
    const auto& st = cf.stage(j);
    const auto& at = chain.mu(j + 1);
    check_in_box(cf, j, at);
    const auto jac = mean_jacobian(st, j, at, s);
    std::vector<double> next(st.output_dim);
    d.stage[j - 1](at, next);
    for (std::size_t r = 0; r < st.output_dim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < st.input_dim; ++c) acc += jac[r * st.input_dim + c] * xi[c];
      next[r] += acc;
    }
    xi = std::move(next);
  }
  return xi.front();
}

std::vector<double> xi_coefficients(const CompositeFunctional& cf, const MeanChain& chain,
                                    const SampleSet& s) {
  require_compatible(cf, s);
  const std::size_t k = cf.levels();
  std::vector<double> lambda{1.0};
  std::vector<double> stacked = lambda;
  for (std::size_t j = 1; j <= k; ++j) {
    const auto& st = cf.stage(j);
    const auto jac = mean_jacobian(st, j, chain.mu(j + 1), s);
    std::vector<double> next(st.input_dim, 0.0);
    for (std::size_t c = 0; c < st.input_dim; ++c) {
      for (std::size_t r = 0; r < st.output_dim; ++r) next[c] += lambda[r] * jac[r * st.input_dim + c];
    }
    lambda = std::move(next);
    stacked.insert(stacked.end(), lambda.begin(), lambda.end());
  }
  return stacked;
}

namespace {

double perturbed_value(const CompositeFunctional& cf, const SampleSet& s, const DirectionBundle& d, double t) {
  const std::size_t k = cf.levels();
  std::vector<double> eta = stage_mean(cf.stage(k + 1), {}, s);
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] += t * d.terminal[i];
  for (std::size_t j = k; j >= 1; --j) {
    check_in_box(cf, j, eta);
    auto next = stage_mean(cf.stage(j), eta, s);
    if (t != 0.0) {
      std::vector<double> dir(next.size());
      d.stage[j - 1](eta, dir);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += t * dir[i];
    }
    eta = std::move(next);
  }
  return eta.front();
}

}  // namespace

double finite_diff_directional(const CompositeFunctional& cf, const SampleSet& s, const DirectionBundle& d,
                               double t) {
  require_compatible(cf, s);
  if (!(t > 0.0)) throw ParameterOutOfRange("finite-difference step must be positive");
  if (d.stage.size() != cf.levels() || d.terminal.size() != cf.stage(cf.levels() + 1).output_dim) {
    throw DimensionMismatch("direction bundle does not match the functional");
  }
  const double base = perturbed_value(cf, s, d, 0.0);
  return (perturbed_value(cf, s, d, t) - base) / t;
}

double max_jacobian_error(const CompositeFunctional& cf, const SampleSet& s, std::size_t probes,
                          std::uint64_t seed) {
  require_compatible(cf, s);
  Xoshiro256 rng(seed);
  double worst = 0.0;
  for (std::size_t j = 1; j <= cf.levels(); ++j) {
    const auto& st = cf.stage(j);
    const auto& box = cf.box(j);
    if (!box.bounded()) throw ParameterOutOfRange("Jacobian probes need a bounded box I_" + std::to_string(j));
    if (!st.jacobian) throw MissingJacobian("stage " + std::to_string(j) + " has no Jacobian");
    const std::size_t in = st.input_dim;
    const std::size_t out = st.output_dim;
    std::vector<double> eta(in), jac(out * in), plus(out), minus(out);
    for (std::size_t probe = 0; probe < probes; ++probe) {
      for (std::size_t c = 0; c < in; ++c) {
        eta[c] = box.lower[c] + (box.upper[c] - box.lower[c]) * (0.05 + 0.9 * rng.uniform());
      }
      const auto x = s.row(static_cast<std::size_t>(rng.uniform() * static_cast<double>(s.size())));
      st.jacobian(eta, x, jac);
      for (std::size_t c = 0; c < in; ++c) {
        const double h = 1e-6 * std::max(1.0, std::abs(eta[c]));
        const double saved = eta[c];
        eta[c] = saved + h;
        st.evaluate(eta, x, plus);
        eta[c] = saved - h;
        st.evaluate(eta, x, minus);
        eta[c] = saved;
        for (std::size_t r = 0; r < out; ++r) {
          const double fd = (plus[r] - minus[r]) / (2.0 * h);
          const double analytic = jac[r * in + c];
          const double scale = std::max({1.0, std::abs(fd), std::abs(analytic)});
          worst = std::max(worst, std::abs(fd - analytic) / scale);
        }
      }
    }
  }
  return worst;
}

}  // namespace riskclt
