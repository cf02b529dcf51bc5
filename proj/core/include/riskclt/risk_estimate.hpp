#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace riskclt {

/// Point estimate rho^(n) with optional minimizer and the standard deviation
/// of the normal limit of sqrt(n) (rho^(n) - rho).
struct RiskEstimate {
  std::string measure;
  double value = 0.0;
  std::size_t n = 0;
  std::vector<double> minimizer;
  std::optional<double> limit_sd;
  std::vector<std::string> warnings;
};

}  // namespace riskclt
