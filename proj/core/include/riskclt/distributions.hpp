#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "riskclt/risk_measures.hpp"
#include "riskclt/sample_set.hpp"

namespace riskclt {

enum class Family { Normal, StudentT, Empirical };

/// A data model plus the draw size and seed. StudentT draws are a standard
/// t variate plus `shift`. Empirical echoes the rows of a CSV file, so n and
/// seed are ignored for it.
struct DistributionSpec {
  Family family = Family::Normal;
  double mean = 0.0;
  double sd = 1.0;
  double nu = 0.0;
  double shift = 0.0;
  std::string file;
  std::uint64_t seed = 0;
  std::size_t n = 1;

  static DistributionSpec normal(double mean, double sd, std::size_t n = 1, std::uint64_t seed = 0);
  static DistributionSpec student_t(double nu, double shift, std::size_t n = 1, std::uint64_t seed = 0);
  static DistributionSpec empirical(std::string file);

  void validate() const;
  std::string describe() const;
};

/// n i.i.d. draws, deterministic in (spec, seed).
SampleSet sample(const DistributionSpec& spec);

/// One observation per row, comma-separated coordinates, optional header
/// line, '.' as the decimal point.
SampleSet read_csv(const std::filesystem::path& path);

/// Population value, limit sd and (where it exists) minimizer of a measure.
struct OracleValues {
  double value = 0.0;
  double limit_sd = 0.0;
  std::optional<double> minimizer;
  /// The limit sd involves a moment that does not exist; limit_sd is +inf.
  bool infinite_variance = false;
};

/// Dense z-grid search over quadrature-evaluated objective values followed by
/// Brent refinement; sd from the population form of the delta-method limit.
OracleValues oracle_higher_order(const DistributionSpec& spec, double p, double c, std::size_t grid = 2001);
OracleValues oracle_avar(const DistributionSpec& spec, double alpha);
OracleValues oracle_semideviation(const DistributionSpec& spec, double p, double kappa);
OracleValues oracle(const MeasureSpec& measure, const DistributionSpec& spec);

}  // namespace riskclt
