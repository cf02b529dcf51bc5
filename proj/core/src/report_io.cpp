#include "riskclt/report_io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace riskclt {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v[i]);
  }
  return out;
}

const char* standardization_name(Standardization s) {
  return s == Standardization::PlugIn ? "plugin" : "oracle";
}

}  // namespace

void write_report(std::ostream& out, const SimulationReport& report, bool include_timing) {
  const auto& c = report.config;
  out << "measure = " << c.measure.describe() << '\n';
  out << "distribution = " << c.distribution.describe() << '\n';
  out << "replications = " << c.replications << '\n';
  out << "master_seed = " << c.master_seed << '\n';
  out << "histogram_rule = " << c.histogram_rule << '\n';
  out << "standardization = " << standardization_name(c.standardization) << '\n';
  out << "oracle.value = " << num(report.oracle.value) << '\n';
  out << "oracle.limit_sd = " << num(report.oracle.limit_sd) << '\n';
  if (report.oracle.minimizer) out << "oracle.minimizer = " << num(*report.oracle.minimizer) << '\n';
  if (report.oracle.infinite_variance) out << "oracle.infinite_variance = true\n";
  if (include_timing) out << "wall_seconds = " << num(report.wall_seconds) << '\n';

  for (const auto& size : report.sizes) {
    out << "\n[n = " << size.n << "]\n";
    out << "ks = " << num(size.ks) << '\n';
    out << "bias = " << num(size.bias) << '\n';
    out << "overlay_mean = " << num(size.overlay_mean) << '\n';
    out << "overlay_sd = " << num(size.overlay_sd) << '\n';
    out << "failures = " << size.failures << '\n';
    if (size.degenerate) out << "degenerate = true\n";
    for (const auto& msg : size.failure_messages) out << "failure = " << msg << '\n';
    out << "histogram.edges = " << join(size.histogram.edges) << '\n';
    out << "histogram.density = " << join(size.histogram.density) << '\n';
  }
}

void write_table(std::ostream& out, const SimulationReport& report) {
  out << "n,replicate,estimate\n";
  for (const auto& size : report.sizes) {
    for (std::size_t r = 0; r < size.estimates.size(); ++r) {
      out << size.n << ',' << r << ',' << num(size.estimates[r]) << '\n';
    }
  }
}

}  // namespace riskclt
