#include "riskclt/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "riskclt/error.hpp"
#include "riskclt/format.hpp"
#include "riskclt/random.hpp"
#include "riskclt/summation.hpp"

namespace riskclt {

DistributionSpec DistributionSpec::normal(double mean, double sd, std::size_t n, std::uint64_t seed) {
  DistributionSpec spec;
  spec.family = Family::Normal;
  spec.mean = mean;
  spec.sd = sd;
  spec.n = n;
  spec.seed = seed;
  spec.validate();
  return spec;
}

DistributionSpec DistributionSpec::student_t(double nu, double shift, std::size_t n, std::uint64_t seed) {
  DistributionSpec spec;
  spec.family = Family::StudentT;
  spec.nu = nu;
  spec.shift = shift;
  spec.n = n;
  spec.seed = seed;
  spec.validate();
  return spec;
}

DistributionSpec DistributionSpec::empirical(std::string file) {
  DistributionSpec spec;
  spec.family = Family::Empirical;
  spec.file = std::move(file);
  spec.validate();
  return spec;
}

void DistributionSpec::validate() const {
  switch (family) {
    case Family::Normal:
      if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
        throw ParameterOutOfRange("normal distribution needs a finite mean and sd > 0");
      }
      break;
    case Family::StudentT:
      if (!(nu > 0.0) || !std::isfinite(nu) || !std::isfinite(shift)) {
        throw ParameterOutOfRange("t distribution needs nu > 0 and a finite shift");
      }
      break;
    case Family::Empirical:
      if (file.empty()) throw ParameterOutOfRange("empirical distribution needs a data file");
      return;
  }
  if (n < 1) throw ParameterOutOfRange("sample size n must be at least 1");
}

std::string DistributionSpec::describe() const {
  std::ostringstream out;
  switch (family) {
    case Family::Normal:
      out << "normal(mean=" << shortest(mean) << ",sd=" << shortest(sd) << ")";
      break;
    case Family::StudentT:
      out << "student_t(nu=" << shortest(nu) << ",shift=" << shortest(shift) << ")";
      break;
    case Family::Empirical:
      out << "csv:" << file;
      break;
  }
  return out.str();
}

SampleSet sample(const DistributionSpec& spec) {
  spec.validate();
  if (spec.family == Family::Empirical) return read_csv(spec.file);

  Xoshiro256 rng(spec.seed);
  std::vector<double> values(spec.n);
  if (spec.family == Family::Normal) {
    std::normal_distribution<double> dist(spec.mean, spec.sd);
    for (double& v : values) v = dist(rng);
  } else {
    std::student_t_distribution<double> dist(spec.nu);
    for (double& v : values) v = dist(rng) + spec.shift;
  }
  return SampleSet::from_scalars(std::move(values), Provenance{spec.describe(), spec.seed, spec.n});
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_row(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) return true;
    start = comma + 1;
  }
}

}  // namespace

SampleSet read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open data file " + path.string());
  std::vector<double> values;
  std::vector<double> row;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!parse_row(text, row)) {
      if (line_no == 1) continue;  // header
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": cannot parse numeric row");
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " columns, got " + std::to_string(row.size()));
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  if (values.empty()) throw ParseError(path.string() + ": no observations");
  const std::size_t rows = values.size() / dim;
  return SampleSet(std::move(values), dim, Provenance{"csv:" + path.string(), std::nullopt, rows});
}

namespace {

// Population law of a scalar data model, exposing what the oracles integrate.
class Population {
 public:
  explicit Population(const DistributionSpec& spec) : spec_(spec) {
    spec.validate();
    if (spec.family == Family::Empirical) {
      const auto s = read_csv(spec.file);
      s.require_scalar("empirical oracle");
      atoms_.assign(s.values().begin(), s.values().end());
      std::sort(atoms_.begin(), atoms_.end());
    }
  }

  bool degenerate() const { return spec_.family == Family::Empirical && atoms_.front() == atoms_.back(); }

  /// Whether E|X|^q is finite.
  bool has_moment(double q) const { return spec_.family != Family::StudentT || spec_.nu > q; }

  double mean() const {
    switch (spec_.family) {
      case Family::Normal:
        return spec_.mean;
      case Family::StudentT:
        if (!has_moment(1.0)) throw IntegrationFailure("t distribution has no mean for nu <= 1");
        return spec_.shift;
      case Family::Empirical:
        return pairwise_mean(atoms_);
    }
    return 0.0;
  }

  double variance() const {
    switch (spec_.family) {
      case Family::Normal:
        return spec_.sd * spec_.sd;
      case Family::StudentT:
        return has_moment(2.0) ? spec_.nu / (spec_.nu - 2.0) : std::numeric_limits<double>::infinity();
      case Family::Empirical:
        return population_variance(atoms_);
    }
    return 0.0;
  }

  /// Lower quantile inf{x : F(x) >= prob}.
  double quantile(double prob) const {
    switch (spec_.family) {
      case Family::Normal:
        return boost::math::quantile(boost::math::normal_distribution<double>(spec_.mean, spec_.sd), prob);
      case Family::StudentT:
        return boost::math::quantile(boost::math::students_t_distribution<double>(spec_.nu), prob) + spec_.shift;
      case Family::Empirical: {
        const double n = static_cast<double>(atoms_.size());
        const double idx = std::max(1.0, std::ceil(prob * n - 1e-9));
        return atoms_[std::min(atoms_.size(), static_cast<std::size_t>(idx)) - 1];
      }
    }
    return 0.0;
  }

  /// E[max(0, X - z)^q]; +inf when the moment does not exist.
  double tail_moment(double z, double q) const {
    if (spec_.family == Family::Empirical) {
      return pairwise_mean(atoms_.size(), [&](std::size_t i) {
        const double d = atoms_[i] - z;
        return d > 0.0 ? (q == 0.0 ? 1.0 : std::pow(d, q)) : 0.0;
      });
    }
    if (!has_moment(q)) return std::numeric_limits<double>::infinity();
    auto density = [this](double x) {
      if (spec_.family == Family::Normal) {
        return boost::math::pdf(boost::math::normal_distribution<double>(spec_.mean, spec_.sd), x);
      }
      return boost::math::pdf(boost::math::students_t_distribution<double>(spec_.nu), x - spec_.shift);
    };
    auto integrand = [&](double t) {
      // Far in the tail the density underflows while t^q overflows.
      const double f = density(z + t);
      return f == 0.0 ? 0.0 : (q == 0.0 ? 1.0 : std::pow(t, q)) * f;
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    const double value = integrator.integrate(integrand, 1e-12, &error);
    if (!std::isfinite(value) || error > 1e-6 * (1.0 + std::abs(value))) {
      throw IntegrationFailure("tail moment quadrature did not converge (q=" + std::to_string(q) + ")");
    }
    return value;
  }

  /// Search range for a tail minimizer.
  std::pair<double, double> tail_range() const {
    if (spec_.family == Family::Empirical) return {atoms_.front() - 1.0, atoms_.back()};
    return {quantile(1e-3), quantile(1.0 - 1e-9)};
  }

  double point_mass() const { return atoms_.front(); }

 private:
  DistributionSpec spec_;
  std::vector<double> atoms_;
};

}  // namespace

OracleValues oracle_higher_order(const DistributionSpec& spec, double p, double c, std::size_t grid) {
  if (!(p > 1.0) || !(c > 1.0)) throw ParameterOutOfRange("higher-order oracle needs p > 1 and c > 1");
  if (grid < 3) throw ParameterOutOfRange("oracle grid needs at least 3 points");
  const Population pop(spec);
  if (pop.degenerate()) return OracleValues{pop.point_mass(), 0.0, pop.point_mass(), false};
  if (!pop.has_moment(p)) throw IntegrationFailure("the p-th moment does not exist; the measure is infinite");

  auto objective = [&](double z) { return z + c * std::pow(pop.tail_moment(z, p), 1.0 / p); };
  const auto [lo, hi] = pop.tail_range();
  std::vector<double> values(grid);
  const double step = (hi - lo) / static_cast<double>(grid - 1);
  for (std::size_t i = 0; i < grid; ++i) values[i] = objective(lo + step * static_cast<double>(i));
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  const double left = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
  const double right = lo + step * static_cast<double>(std::min(best + 1, grid - 1));
  std::uintmax_t max_iter = 500;
  const auto [z, value] =
      boost::math::tools::brent_find_minima(objective, left, right, std::numeric_limits<double>::digits / 2, max_iter);

  OracleValues out;
  out.value = value;
  out.minimizer = z;
  if (!pop.has_moment(2.0 * p)) {
    out.infinite_variance = true;
    out.limit_sd = std::numeric_limits<double>::infinity();
    return out;
  }
  const double mp = pop.tail_moment(z, p);
  const double m2p = pop.tail_moment(z, 2.0 * p);
  out.limit_sd = (c / p) * std::pow(mp, (1.0 - p) / p) * std::sqrt(std::max(0.0, m2p - mp * mp));
  return out;
}

OracleValues oracle_avar(const DistributionSpec& spec, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterOutOfRange("AVaR level alpha must lie in (0, 1]");
  const Population pop(spec);
  if (pop.degenerate()) return OracleValues{pop.point_mass(), 0.0, pop.point_mass(), false};
  if (!pop.has_moment(1.0)) throw IntegrationFailure("the mean does not exist; AVaR is infinite");
  const double z = alpha == 1.0 ? pop.quantile(0.0) : pop.quantile(1.0 - alpha);
  OracleValues out;
  out.minimizer = z;
  if (alpha == 1.0 && !std::isfinite(z)) {
    out.value = pop.mean();
    out.minimizer.reset();
  } else {
    out.value = z + pop.tail_moment(z, 1.0) / alpha;
  }
  if (!pop.has_moment(2.0)) {
    out.infinite_variance = true;
    out.limit_sd = std::numeric_limits<double>::infinity();
    return out;
  }
  if (alpha == 1.0) {
    out.limit_sd = std::sqrt(pop.variance());
    return out;
  }
  const double m1 = pop.tail_moment(z, 1.0);
  const double m2 = pop.tail_moment(z, 2.0);
  out.limit_sd = std::sqrt(std::max(0.0, m2 - m1 * m1)) / alpha;
  return out;
}

OracleValues oracle_semideviation(const DistributionSpec& spec, double p, double kappa) {
  if (!(p >= 1.0) || !(kappa >= 0.0 && kappa <= 1.0)) {
    throw ParameterOutOfRange("semideviation oracle needs p >= 1 and kappa in [0, 1]");
  }
  const Population pop(spec);
  if (pop.degenerate()) return OracleValues{pop.point_mass(), 0.0, std::nullopt, false};
  if (!pop.has_moment(p)) throw IntegrationFailure("the p-th moment does not exist; the measure is infinite");
  const double mu = pop.mean();
  const double mp = pop.tail_moment(mu, p);
  OracleValues out;
  out.value = mu + kappa * std::pow(mp, 1.0 / p);
  if (!pop.has_moment(2.0 * p) || !pop.has_moment(2.0)) {
    out.infinite_variance = true;
    out.limit_sd = std::numeric_limits<double>::infinity();
    return out;
  }
  // xi = A (X - mu) + b ((X - mu)_+^p - m_p) with A = 1 - a b.
  const double a = p * pop.tail_moment(mu, p - 1.0);
  const double b = kappa > 0.0 ? (kappa / p) * std::pow(mp, (1.0 - p) / p) : 0.0;
  const double A = 1.0 - a * b;
  const double cross = pop.tail_moment(mu, p + 1.0);
  const double m2p = pop.tail_moment(mu, 2.0 * p);
  const double variance = A * A * pop.variance() + 2.0 * A * b * cross + b * b * (m2p - mp * mp);
  out.limit_sd = std::sqrt(std::max(0.0, variance));
  return out;
}

OracleValues oracle(const MeasureSpec& measure, const DistributionSpec& spec) {
  measure.validate();
  switch (measure.kind) {
    case MeasureKind::MeanSemideviation:
      return oracle_semideviation(spec, measure.order, measure.kappa);
    case MeasureKind::AVaR:
      return oracle_avar(spec, measure.alpha);
    case MeasureKind::HigherOrderInverse:
      return oracle_higher_order(spec, measure.order, measure.scale);
  }
  throw ParameterOutOfRange("unknown measure kind");
}

}  // namespace riskclt
