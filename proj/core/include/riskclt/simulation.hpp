#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskclt/distributions.hpp"
#include "riskclt/risk_measures.hpp"

namespace riskclt {

inline constexpr std::uint64_t kDefaultMasterSeed = 1;

enum class Standardization {
  Oracle,  // (rho_j - rho) / (sigma / sqrt(n)) with population rho, sigma
  PlugIn,  // (rho_j - rho) / (sigma_hat_j / sqrt(n)), per-replicate plug-in sd
};

/// Monte Carlo study of one measure on one data model over a grid of sample
/// sizes. The distribution's own n and seed are ignored: every replicate
/// draws its sample with a seed derived from (master_seed, n, replicate).
struct ExperimentConfig {
  DistributionSpec distribution;
  MeasureSpec measure;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 2500;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string histogram_rule = "sqrt";
  Standardization standardization = Standardization::Oracle;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  void validate() const;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<double> density;
};

struct SizeReport {
  std::size_t n = 0;
  /// One entry per replicate; NaN marks a failed replicate.
  std::vector<double> estimates;
  /// Per-replicate plug-in limit sd (PlugIn standardization only).
  std::vector<double> plugin_sd;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  Histogram histogram;
  double overlay_mean = 0.0;
  double overlay_sd = 0.0;
  double ks = 0.0;
  bool degenerate = false;
  double bias = 0.0;
};

struct SimulationReport {
  ExperimentConfig config;
  OracleValues oracle;
  std::vector<SizeReport> sizes;
  double wall_seconds = 0.0;
};

/// Replicates, histograms, normal overlay and Kolmogorov distance for every n.
/// Bit-identical for a fixed config regardless of the thread count.
SimulationReport run_experiment(const ExperimentConfig& config);

/// sup_x |F_m(x) - Phi((x - mean) / sd)| evaluated at the jump points of the
/// empirical CDF. An infinite sd makes the reference CDF identically 1/2.
double ks_distance(std::span<const double> values, double mean, double sd);

/// Equal-width density histogram with `bins` bins over [min, max].
Histogram density_histogram(std::span<const double> values, std::size_t bins);

/// Mean replicate minus the oracle value, per sample size.
std::vector<double> bias_summary(const SimulationReport& report);

double standard_normal_cdf(double x) noexcept;

}  // namespace riskclt
