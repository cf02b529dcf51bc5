#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "riskclt/asymptotics.hpp"
#include "riskclt/distributions.hpp"
#include "riskclt/error.hpp"
#include "riskclt/report_io.hpp"
#include "riskclt/risk_measures.hpp"
#include "riskclt/simulation.hpp"

namespace riskclt::cli {

namespace {

// Validation problems detected by the front end itself; mapped to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string measure = "hmcr";
  double alpha = 0.05;
  double p = 2.0;
  double c = 20.0;
  double kappa = 0.5;

  std::string data;
  std::string dist;
  double mean = 0.0;
  double sd = 1.0;
  double nu = 60.0;
  double shift = 0.0;
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultMasterSeed;

  std::size_t m = 2500;
  std::vector<std::size_t> ns;
  std::string config;
  std::string standardize = "oracle";
  std::string table;
  bool timing = false;

  double translate = 1.0;
  double lambda = 2.0;

  std::string out;
  std::string format = "text";
};

struct Field {
  std::string key;
  std::string value;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void add_measure_options(CLI::App& sub, Options& o) {
  sub.add_option("--measure", o.measure, "Risk measure: avar, semidev (mean-semideviation) or hmcr (higher-order)")
      ->check(CLI::IsMember({"avar", "semidev", "hmcr"}))
      ->capture_default_str();
  sub.add_option("--alpha", o.alpha, "AVaR tail level alpha in (0, 1]")->capture_default_str();
  sub.add_option("--p", o.p, "Order p (semidev: p >= 1, hmcr: p >= 1; p = 1 is AVaR at alpha = 1/c)")
      ->capture_default_str();
  sub.add_option("--c", o.c, "hmcr scale c > 1")->capture_default_str();
  sub.add_option("--kappa", o.kappa, "Semideviation weight kappa in [0, 1]")->capture_default_str();
}

void add_input_options(CLI::App& sub, Options& o) {
  sub.add_option("--data", o.data, "CSV file with one observation per row (optional header)");
  sub.add_option("--dist", o.dist, "Sampling model: normal or t (exclusive with --data)")
      ->check(CLI::IsMember({"normal", "t"}));
  sub.add_option("--mean", o.mean, "Normal mean")->capture_default_str();
  sub.add_option("--sd", o.sd, "Normal standard deviation")->capture_default_str();
  sub.add_option("--nu", o.nu, "t degrees of freedom")->capture_default_str();
  sub.add_option("--shift", o.shift, "Location shift added to t draws")->capture_default_str();
}

void add_sampling_options(CLI::App& sub, Options& o) {
  sub.add_option("--n", o.n, "Sample size drawn from --dist")->capture_default_str();
  sub.add_option("--seed", o.seed, "Random seed")->capture_default_str();
}

void add_output_options(CLI::App& sub, Options& o) {
  sub.add_option("--out", o.out, "Write output to this file instead of stdout");
  sub.add_option("--format", o.format, "Output format: text (key = value) or table (CSV)")
      ->check(CLI::IsMember({"text", "table"}))
      ->capture_default_str();
}

std::unique_ptr<CLI::App> build_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Estimators, limit laws and Monte Carlo checks for composite risk functionals",
                                        "riskclt");
  app->require_subcommand(1);

  auto* estimate = app->add_subcommand("estimate", "Plug-in estimate of a risk measure");
  add_measure_options(*estimate, o);
  add_input_options(*estimate, o);
  add_sampling_options(*estimate, o);
  add_output_options(*estimate, o);

  auto* asymptotics = app->add_subcommand("asymptotics", "Plug-in estimate with the sd of its normal limit");
  add_measure_options(*asymptotics, o);
  add_input_options(*asymptotics, o);
  add_sampling_options(*asymptotics, o);
  add_output_options(*asymptotics, o);

  auto* simulate = app->add_subcommand("simulate", "Replicate an estimator and compare with its normal limit");
  add_measure_options(*simulate, o);
  add_input_options(*simulate, o);
  simulate->add_option("--seed", o.seed, "Master seed for replicate substreams")->capture_default_str();
  simulate->add_option("--m", o.m, "Replications per sample size")->capture_default_str();
  simulate->add_option("--ns", o.ns, "Comma-separated sample sizes")->delimiter(',');
  simulate->add_option("--config", o.config, "JSON experiment file; explicit flags override its fields");
  simulate->add_option("--standardize", o.standardize, "KS standardization: oracle or plugin sd")
      ->check(CLI::IsMember({"oracle", "plugin"}))
      ->capture_default_str();
  simulate->add_option("--table", o.table, "Also write the n,replicate,estimate table to this file");
  simulate->add_flag("--timing", o.timing, "Include wall-clock seconds in the report");
  add_output_options(*simulate, o);

  auto* oracle_cmd = app->add_subcommand("oracle", "Population value, limit sd and minimizer by quadrature");
  add_measure_options(*oracle_cmd, o);
  add_input_options(*oracle_cmd, o);
  add_output_options(*oracle_cmd, o);

  auto* coherence = app->add_subcommand("coherence", "Sample-level coherence axiom residuals");
  add_measure_options(*coherence, o);
  add_input_options(*coherence, o);
  add_sampling_options(*coherence, o);
  coherence->add_option("--translate", o.translate, "Constant a in rho(X + a) = rho(X) + a")->capture_default_str();
  coherence->add_option("--lambda", o.lambda, "Factor lambda > 0 in rho(lambda X) = lambda rho(X)")
      ->capture_default_str();
  add_output_options(*coherence, o);
  return app;
}

MeasureSpec make_measure(const Options& o) {
  if (o.measure == "avar") return MeasureSpec::avar(o.alpha);
  if (o.measure == "semidev") return MeasureSpec::semideviation(o.p, o.kappa);
  if (o.measure == "hmcr") {
    if (!(o.p >= 1.0)) throw ParameterOutOfRange("hmcr order p must be >= 1");
    return MeasureSpec::higher_order(o.p, o.c);
  }
  throw UsageError("unknown measure '" + o.measure + "'");
}

DistributionSpec make_distribution(const Options& o, bool with_sampling) {
  const bool has_data = !o.data.empty();
  const bool has_dist = !o.dist.empty();
  if (has_data == has_dist) throw UsageError("exactly one of --data or --dist is required");
  if (has_data) return DistributionSpec::empirical(o.data);
  const std::size_t n = with_sampling ? o.n : 1;
  if (o.dist == "normal") return DistributionSpec::normal(o.mean, o.sd, n, o.seed);
  return DistributionSpec::student_t(o.nu, o.shift, n, o.seed);
}

// RFC 4180 quoting for values such as "hmcr(p=2,c=20)".
std::string csv_cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + '"';
}

void emit(std::ostream& out, const std::vector<Field>& fields, const std::string& format) {
  if (format == "table") {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i].key;
    out << '\n';
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_cell(fields[i].value);
    out << '\n';
    return;
  }
  for (const auto& f : fields) out << f.key << " = " << f.value << '\n';
}

std::string joined_warnings(const std::vector<std::string>& warnings) {
  std::string s;
  for (std::size_t i = 0; i < warnings.size(); ++i) s += (i ? "; " : "") + warnings[i];
  return s;
}

std::vector<Field> estimate_fields(const MeasureSpec& measure, const DistributionSpec& dist,
                                   const RiskEstimate& est, bool with_sd) {
  std::vector<Field> f{{"measure", measure.describe()}, {"input", dist.describe()},
                       {"n", std::to_string(est.n)}, {"value", num(est.value)}};
  f.push_back({"minimizer", est.minimizer.empty() ? "" : num(est.minimizer.front())});
  if (with_sd) {
    const double sd = est.limit_sd.value_or(std::numeric_limits<double>::quiet_NaN());
    f.push_back({"limit_sd", num(sd)});
    f.push_back({"standard_error", num(sd / std::sqrt(static_cast<double>(est.n)))});
  }
  f.push_back({"warnings", joined_warnings(est.warnings)});
  return f;
}

RiskEstimate with_limit_sd(const MeasureSpec& measure, const SampleSet& s) {
  switch (measure.kind) {
    case MeasureKind::MeanSemideviation:
      return limit_sd_semideviation(s, measure.order, measure.kappa);
    case MeasureKind::AVaR:
      return limit_sd_avar(s, measure.alpha);
    case MeasureKind::HigherOrderInverse:
      return limit_sd_higher_order(s, measure.order, measure.scale);
  }
  throw UsageError("unknown measure");
}

template <typename T>
void set_if(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

// Fills options from a JSON experiment file, skipping anything given on the command line.
void apply_config(const CLI::App& sub, Options& o) {
  std::ifstream in(o.config);
  if (!in) throw FileNotFound("cannot open config file '" + o.config + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + o.config + "': " + e.what());
  }
  auto given = [&](const char* flag) { return sub.get_option(flag)->count() > 0; };
  try {
    if (j.contains("distribution")) {
      const auto& d = j.at("distribution");
      const bool cli_input = given("--dist") || given("--data");
      if (!cli_input) {
        const std::string family = d.value("family", "normal");
        if (family == "empirical") {
          o.data = d.at("file").get<std::string>();
        } else {
          o.dist = family;
        }
      }
      if (!given("--mean")) set_if(d, "mean", o.mean);
      if (!given("--sd")) set_if(d, "sd", o.sd);
      if (!given("--nu")) set_if(d, "nu", o.nu);
      if (!given("--shift")) set_if(d, "shift", o.shift);
    }
    if (j.contains("measure")) {
      const auto& ms = j.at("measure");
      if (!given("--measure")) set_if(ms, "name", o.measure);
      if (!given("--alpha")) set_if(ms, "alpha", o.alpha);
      if (!given("--p")) set_if(ms, "p", o.p);
      if (!given("--c")) set_if(ms, "c", o.c);
      if (!given("--kappa")) set_if(ms, "kappa", o.kappa);
    }
    if (!given("--ns")) set_if(j, "sample_sizes", o.ns);
    if (!given("--m")) set_if(j, "replications", o.m);
    if (!given("--seed")) set_if(j, "master_seed", o.seed);
    if (!given("--standardize")) set_if(j, "standardization", o.standardize);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + o.config + "': " + e.what());
  }
  if (j.contains("histogram_rule") && j.at("histogram_rule") != "sqrt") {
    throw UsageError("config '" + o.config + "': only the sqrt histogram rule is supported");
  }
}

unsigned threads_from_env() {
  const char* raw = std::getenv("RISKCLT_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  unsigned value = 0;
  const std::string_view s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value == 0) {
    throw UsageError("RISKCLT_THREADS must be a positive integer, got '" + std::string(s) + "'");
  }
  return value;
}

// Writes to --out when given, otherwise to `out`.
template <typename Writer>
void deliver(const Options& o, std::ostream& out, Writer&& write) {
  if (o.out.empty()) {
    write(out);
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw FileNotFound("cannot write output file '" + o.out + "'");
  write(file);
}

int dispatch(const CLI::App& app, Options& o, std::ostream& out) {
  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  if (name == "simulate") {
    if (!o.config.empty()) apply_config(*sub, o);
    ExperimentConfig cfg;
    if (o.ns.empty()) throw UsageError("simulate needs --ns or a config with sample_sizes");
    cfg.measure = make_measure(o);
    cfg.distribution = make_distribution(o, false);
    cfg.sample_sizes = o.ns;
    cfg.replications = o.m;
    cfg.master_seed = o.seed;
    cfg.standardization = o.standardize == "plugin" ? Standardization::PlugIn : Standardization::Oracle;
    cfg.threads = threads_from_env();
    cfg.validate();
    const auto report = run_experiment(cfg);
    deliver(o, out, [&](std::ostream& os) {
      if (o.format == "table") {
        write_table(os, report);
      } else {
        write_report(os, report, o.timing);
      }
    });
    if (!o.table.empty()) {
      std::ofstream file(o.table, std::ios::binary);
      if (!file) throw FileNotFound("cannot write table file '" + o.table + "'");
      write_table(file, report);
    }
    return 0;
  }

  const MeasureSpec measure = make_measure(o);
  if (name == "oracle") {
    const DistributionSpec dist = make_distribution(o, false);
    const auto values = riskclt::oracle(measure, dist);
    std::vector<Field> f{{"measure", measure.describe()},
                         {"distribution", dist.describe()},
                         {"value", num(values.value)},
                         {"limit_sd", num(values.limit_sd)},
                         {"minimizer", values.minimizer ? num(*values.minimizer) : ""},
                         {"infinite_variance", values.infinite_variance ? "true" : "false"}};
    deliver(o, out, [&](std::ostream& os) { emit(os, f, o.format); });
    return 0;
  }

  if (name == "coherence" && !(o.lambda > 0.0)) throw ParameterOutOfRange("--lambda must be positive");
  const DistributionSpec dist = make_distribution(o, true);
  const SampleSet s = sample(dist);

  std::vector<Field> f;
  if (name == "estimate") {
    f = estimate_fields(measure, dist, riskclt::estimate(measure, s), false);
  } else if (name == "asymptotics") {
    f = estimate_fields(measure, dist, with_limit_sd(measure, s), true);
  } else {
    const auto r = coherence_check(measure, s, o.translate, o.lambda);
    f = {{"measure", measure.describe()},
         {"input", dist.describe()},
         {"n", std::to_string(s.size())},
         {"translation", num(r.translation)},
         {"homogeneity", num(r.homogeneity)},
         {"monotonicity", num(r.monotonicity)},
         {"convexity", num(r.convexity)}};
  }
  deliver(o, out, [&](std::ostream& os) { emit(os, f, o.format); });
  return 0;
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  auto app = build_app(o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "riskclt: error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    return dispatch(*app, o, out);
  } catch (const UsageError& e) {
    err << "riskclt: error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const ParameterOutOfRange& e) {
    err << "riskclt: error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "riskclt: runtime error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

std::string help_text(const std::string& subcommand) {
  std::ostringstream out;
  std::ostringstream err;
  std::vector<std::string> args;
  if (!subcommand.empty()) args.push_back(subcommand);
  args.emplace_back("--help");
  run(args, out, err);
  return out.str();
}

std::vector<std::string> subcommands() { return {"estimate", "asymptotics", "simulate", "oracle", "coherence"}; }

}  // namespace riskclt::cli
