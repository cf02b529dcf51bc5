#include "riskclt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "riskclt/asymptotics.hpp"
#include "riskclt/error.hpp"
#include "riskclt/random.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

namespace {

constexpr std::size_t kMaxFailureMessages = 8;

struct ReplicateOutcome {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double plugin_sd = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

double plugin_limit_sd(const MeasureSpec& measure, const SampleSet& s) {
  switch (measure.kind) {
    case MeasureKind::MeanSemideviation:
      return *limit_sd_semideviation(s, measure.order, measure.kappa).limit_sd;
    case MeasureKind::AVaR:
      return *limit_sd_avar(s, measure.alpha).limit_sd;
    case MeasureKind::HigherOrderInverse:
      return *limit_sd_higher_order(s, measure.order, measure.scale).limit_sd;
  }
  throw ParameterOutOfRange("unknown measure kind");
}

ReplicateOutcome run_replicate(const ExperimentConfig& config, std::size_t n, std::size_t replicate) {
  ReplicateOutcome outcome;
  try {
    DistributionSpec spec = config.distribution;
    spec.n = n;
    spec.seed = derive_seed(config.master_seed, n, replicate);
    const auto s = sample(spec);
    if (config.standardization == Standardization::PlugIn) {
      outcome.plugin_sd = plugin_limit_sd(config.measure, s);
      if (!(outcome.plugin_sd > 0.0)) throw DegenerateSample("plug-in limit sd is zero");
    }
    outcome.estimate = estimate(config.measure, s).value;
  } catch (const Error& e) {
    outcome.estimate = std::numeric_limits<double>::quiet_NaN();
    outcome.error = e.what();
  }
  return outcome;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

}  // namespace

void ExperimentConfig::validate() const {
  distribution.validate();
  measure.validate();
  if (replications < 2) throw ParameterOutOfRange("replication count m must be at least 2");
  if (sample_sizes.empty()) throw ParameterOutOfRange("at least one sample size is required");
  for (std::size_t n : sample_sizes) {
    if (n < 2) throw ParameterOutOfRange("every sample size n must be at least 2");
  }
  if (histogram_rule != "sqrt") throw ParameterOutOfRange("unknown histogram rule '" + histogram_rule + "'");
}

double standard_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance(std::span<const double> values, double mean, double sd) {
  if (!(sd > 0.0)) throw DegenerateInput("ks_distance: sd must be positive");
  if (values.empty()) throw DegenerateInput("ks_distance: no values");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw DegenerateInput("ks_distance: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double distance = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = std::isinf(sd) ? 0.5 : standard_normal_cdf((sorted[i] - mean) / sd);
    const double above = static_cast<double>(i + 1) / m - f;
    const double below = f - static_cast<double>(i) / m;
    distance = std::max({distance, above, below});
  }
  return std::clamp(distance, 0.0, 1.0);
}

Histogram density_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw DegenerateInput("density_histogram: no values");
  bins = std::max<std::size_t>(bins, 1);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  Histogram h;
  if (lo == hi) {
    // Single atom: one unit-width bin centred on it.
    h.edges = {lo - 0.5, lo + 0.5};
    h.density = {1.0};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  h.density.resize(bins);
  const double total = static_cast<double>(values.size());
  for (std::size_t b = 0; b < bins; ++b) {
    h.density[b] = static_cast<double>(counts[b]) / (total * (h.edges[b + 1] - h.edges[b]));
  }
  return h;
}

SimulationReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  SimulationReport report;
  report.config = config;
  report.oracle = oracle(config.measure, config.distribution);

  const std::size_t m = config.replications;
  const std::size_t jobs = config.sample_sizes.size() * m;
  std::vector<ReplicateOutcome> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next.fetch_add(1); job < jobs; job = next.fetch_add(1)) {
      outcomes[job] = run_replicate(config, config.sample_sizes[job / m], job % m);
    }
  };
  const unsigned threads = std::min<unsigned>(resolve_threads(config.threads), static_cast<unsigned>(jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  const double rho = report.oracle.value;
  const double sigma = report.oracle.limit_sd;
  for (std::size_t k = 0; k < config.sample_sizes.size(); ++k) {
    SizeReport size;
    size.n = config.sample_sizes[k];
    const double root_n = std::sqrt(static_cast<double>(size.n));
    size.overlay_mean = rho;
    size.overlay_sd = sigma / root_n;

    std::vector<double> ok;
    std::vector<double> standardized;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& outcome = outcomes[k * m + r];
      size.estimates.push_back(outcome.estimate);
      if (config.standardization == Standardization::PlugIn) size.plugin_sd.push_back(outcome.plugin_sd);
      if (!outcome.error.empty()) {
        ++size.failures;
        if (size.failure_messages.size() < kMaxFailureMessages) {
          size.failure_messages.push_back("replicate " + std::to_string(r) + ": " + outcome.error);
        }
        continue;
      }
      ok.push_back(outcome.estimate);
      const double scale = config.standardization == Standardization::PlugIn ? outcome.plugin_sd : sigma;
      standardized.push_back((outcome.estimate - rho) / (scale / root_n));
    }

    if (ok.empty()) {
      size.degenerate = true;
      size.ks = 1.0;
      size.bias = std::numeric_limits<double>::quiet_NaN();
      report.sizes.push_back(std::move(size));
      continue;
    }
    const auto bins = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(m))));
    size.histogram = density_histogram(ok, bins);
    size.bias = pairwise_mean(ok) - rho;

    if (config.standardization == Standardization::Oracle && sigma == 0.0) {
      // Point-mass limit: no normal overlay exists.
      size.degenerate = true;
      size.ks = 1.0;
    } else if (report.oracle.infinite_variance && config.standardization == Standardization::Oracle) {
      // The N(rho, inf) reference CDF is identically 1/2.
      size.ks = ks_distance(ok, rho, std::numeric_limits<double>::infinity());
    } else {
      size.ks = ks_distance(standardized, 0.0, 1.0);
    }
    report.sizes.push_back(std::move(size));
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<double> bias_summary(const SimulationReport& report) {
  std::vector<double> out;
  out.reserve(report.sizes.size());
  for (const auto& size : report.sizes) {
    std::vector<double> ok;
    for (double v : size.estimates) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    out.push_back(ok.empty() ? std::numeric_limits<double>::quiet_NaN() : pairwise_mean(ok) - report.oracle.value);
  }
  return out;
}

}  // namespace riskclt
