#include "netabc/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "netabc/csv.hpp"
#include "netabc/experiments.hpp"
#include "netabc/inference.hpp"
#include "netabc/netmodel.hpp"
#include "netabc/summaries.hpp"

#ifndef NETABC_VERSION
#define NETABC_VERSION "dev"
#endif

namespace netabc::cli {

namespace {

namespace fs = std::filesystem;

// Raised for failures to read inputs or write outputs.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string output_dir;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  std::int64_t n = 1000;
  double mu = 0.0;
  Iteration burn_in = 1000;
  Iteration window = kDefaultWindow;
  double rho = 0.3;
  double sigma = 0.1;
  double omega0 = 0.4;
  double omega1 = 0.2;

  std::string design = "one-wave";
  Iteration lag = 0;
  Iteration record_span = 0;  // 0: as needed by the design
  Iteration export_from = 0;  // 0: start of the recorded span
  Iteration export_to = 0;    // 0: end of the recorded span
  std::string events;

  std::string prior_rho = "1,50";
  std::string prior_sigma = "1,90";
  std::string prior_omega0 = "1,40";
  std::string prior_omega1 = "1,61";

  std::size_t table_count = 0;  // 0: 10000 for reftable, 2000 for lag-sweep
  double accept_fraction = 0.01;
  bool adjust = true;
  std::string weighting = "epanechnikov";
  std::string table;
  std::string observed;

  std::string lags = "0,10,25,50,100,150";
  bool one_wave = true;
  std::size_t truth_count = 20;
  std::size_t accepted = 100;

  std::string mapping_param = "sigma";
  std::string mapping_mode = "fixed";
  std::string grid;
  std::size_t runs_per_value = 100;

  std::string loess_input;
  std::string x_column = "x";
  std::string y_column = "y";
  double span = 0.75;
};

Interval parse_interval(const std::string& text, const char* name) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) {
    throw std::invalid_argument(std::string(name) + " expects 'lo,hi', got '" + text + "'");
  }
  try {
    return {parse_double(parts[0]), parse_double(parts[1])};
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(std::string(name) + ": " + e.what());
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, const char* name, Parse parse) {
  std::vector<T> out;
  if (text.empty()) return out;
  for (auto part : split(text, ',')) {
    try {
      out.push_back(parse(part));
    } catch (const std::runtime_error& e) {
      throw std::invalid_argument(std::string(name) + ": " + e.what());
    }
  }
  return out;
}

struct Resolved {
  ModelConfig model;
  PriorSpec prior;
  ParamSet params;
  Design design;
  Weighting weighting = Weighting::Epanechnikov;
};

Resolved resolve(const RunConfig& c) {
  Resolved r;
  r.model = {c.n, c.mu, c.burn_in, c.window};
  r.model.validate();
  r.prior.inv_rho = parse_interval(c.prior_rho, "prior-rho");
  r.prior.inv_sigma = parse_interval(c.prior_sigma, "prior-sigma");
  r.prior.inv_omega0 = parse_interval(c.prior_omega0, "prior-omega0");
  r.prior.inv_omega1 = parse_interval(c.prior_omega1, "prior-omega1");
  r.prior.validate();
  r.params = {c.rho, c.sigma, c.omega0, c.omega1, c.mu, c.n};
  r.params.validate();
  r.design = parse_design(c.design, c.lag);
  if (c.weighting == "epanechnikov") {
    r.weighting = Weighting::Epanechnikov;
  } else if (c.weighting == "uniform") {
    r.weighting = Weighting::Uniform;
  } else {
    throw std::invalid_argument("weighting must be epanechnikov or uniform");
  }
  if (!(c.accept_fraction > 0.0 && c.accept_fraction <= 1.0)) {
    throw std::invalid_argument("accept-fraction must be in (0, 1]");
  }
  return r;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  auto out = open_output(path);
  writer(out);
  finish(out, path);
}

// Resolved configuration, in the same key=value form accepted by --config.
// Output directory and thread count are left out: neither affects results.
void write_run_meta(const fs::path& dir, const std::string& command, const RunConfig& c) {
  write_file(dir / "run.meta", [&](std::ostream& m) {
    m << "# netabc " << NETABC_VERSION << '\n';
    m << "# command=" << command << '\n';
    m << "seed=" << c.seed << '\n';
    m << "n=" << c.n << '\n';
    m << "mu=" << format_double(c.mu) << '\n';
    m << "burn-in=" << c.burn_in << '\n';
    m << "window=" << c.window << '\n';
    m << "rho=" << format_double(c.rho) << '\n';
    m << "sigma=" << format_double(c.sigma) << '\n';
    m << "omega0=" << format_double(c.omega0) << '\n';
    m << "omega1=" << format_double(c.omega1) << '\n';
    m << "design=" << c.design << '\n';
    m << "lag=" << c.lag << '\n';
    m << "record-span=" << c.record_span << '\n';
    m << "export-from=" << c.export_from << '\n';
    m << "export-to=" << c.export_to << '\n';
    m << "events=" << c.events << '\n';
    m << "prior-rho=" << c.prior_rho << '\n';
    m << "prior-sigma=" << c.prior_sigma << '\n';
    m << "prior-omega0=" << c.prior_omega0 << '\n';
    m << "prior-omega1=" << c.prior_omega1 << '\n';
    m << "table-count=" << c.table_count << '\n';
    m << "accept-fraction=" << format_double(c.accept_fraction) << '\n';
    m << "adjust=" << (c.adjust ? "true" : "false") << '\n';
    m << "weighting=" << c.weighting << '\n';
    m << "table=" << c.table << '\n';
    m << "observed=" << c.observed << '\n';
    m << "lags=" << c.lags << '\n';
    m << "one-wave=" << (c.one_wave ? "true" : "false") << '\n';
    m << "truth-count=" << c.truth_count << '\n';
    m << "accepted=" << c.accepted << '\n';
    m << "mapping-param=" << c.mapping_param << '\n';
    m << "mapping-mode=" << c.mapping_mode << '\n';
    m << "grid=" << c.grid << '\n';
    m << "runs-per-value=" << c.runs_per_value << '\n';
    m << "loess-input=" << c.loess_input << '\n';
    m << "x-column=" << c.x_column << '\n';
    m << "y-column=" << c.y_column << '\n';
    m << "span=" << format_double(c.span) << '\n';
  });
}

void write_loess_meta(const fs::path& path, const LoessCurve& curve) {
  write_file(path, [&](std::ostream& m) {
    m << "points=" << curve.x.size() << '\n';
    m << "span=" << format_double(curve.span) << '\n';
    m << "degree=1\n";
    m << "weights=tricube\n";
    m << "residual_sd=" << format_double(curve.residual_sd) << '\n';
    m << "residual_df=" << format_double(curve.residual_df) << '\n';
    m << "interval_method=" << curve.interval_method << '\n';
    m << "interval_approximate=true\n";
  });
}

fs::path table_prefix(const RunConfig& c, const fs::path& dir) {
  return c.table.empty() ? dir / "reftable" : fs::path(c.table);
}

int cmd_simulate(RunConfig& c, const fs::path& dir, std::ostream& out) {
  const auto r = resolve(c);
  const Iteration span = c.record_span > 0 ? c.record_span : r.design.record_span(c.window);
  const auto sim = simulate(r.params, c.burn_in, span, c.seed);
  const Iteration from = c.export_from > 0 ? c.export_from : sim.log.first_iteration();
  const Iteration to = c.export_to > 0 ? c.export_to : sim.log.last_iteration();
  const auto edges = export_edges(sim.log, from, to);
  write_file(dir / "edges.csv", [&](std::ostream& o) { write_edges_csv(o, edges); });
  write_file(dir / "events.log", [&](std::ostream& o) { write_event_log(o, sim.log); });
  out << "simulated " << span << " recorded iterations after " << c.burn_in
      << " burn-in; wrote " << edges.size() << " edge rows\n";
  return kOk;
}

int cmd_summarize(RunConfig& c, const fs::path& dir, std::ostream& out) {
  const auto r = resolve(c);
  const fs::path events = c.events.empty() ? dir / "events.log" : fs::path(c.events);
  std::ifstream in(events);
  if (!in) throw IoError("cannot open " + events.string());
  const EventLog log = read_event_log(in);
  const DesignVector dv[] = {design_summaries(log, r.design, c.window)};
  write_file(dir / "summaries.csv", [&](std::ostream& o) { write_summaries_csv(o, dv); });
  out << "wrote " << dv[0].waves.size() << " wave summaries\n";
  return kOk;
}

int cmd_reftable(RunConfig& c, const fs::path& dir, std::ostream& out) {
  if (c.table_count == 0) c.table_count = 10000;
  const auto r = resolve(c);
  const auto table = build_reference_table(r.design, c.table_count, r.model, r.prior, c.seed,
                                           c.threads);
  const auto prefix = table_prefix(c, dir);
  write_reference_table(table, prefix.string() + ".csv", prefix.string() + ".meta");
  const auto constant = constant_columns(table.column_norms);
  out << "reference table: " << table.rows.size() << " rows, " << table.design.dimension()
      << " summary columns";
  if (!constant.empty()) out << " (" << constant.size() << " constant)";
  out << '\n';
  return kOk;
}

int cmd_infer(RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const auto r = resolve(c);
  const auto prefix = table_prefix(c, dir);
  ReferenceTable table;
  try {
    table = read_reference_table(prefix.string() + ".csv", prefix.string() + ".meta");
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  std::vector<double> observed;
  if (!c.observed.empty()) {
    DesignVector dv;
    try {
      dv = read_summaries_csv(c.observed);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    if (!(dv.design == table.design)) {
      throw std::invalid_argument("observed summaries use design " + dv.design.tag() +
                                  " but the table uses " + table.design.tag());
    }
    observed = dv.values;
  } else {
    // Observation simulated from the configured parameters under the table's design.
    ParamSet truth = r.params;
    truth.n = table.model.n;
    truth.mu = table.model.mu;
    const auto sim =
        simulate(truth, table.model.burn_in, table.design.record_span(table.model.window),
                 stream_seed(c.seed, Stream::TruthSimulation, 0));
    observed = design_summaries(sim.log, table.design, table.model.window).values;
  }
  const auto constant = constant_columns(table.column_norms);
  if (!constant.empty()) {
    err << "warning: " << constant.size()
        << " constant summary column(s) excluded from the distance\n";
  }
  Posterior post = reject_sample(table, observed, c.accept_fraction);
  if (c.adjust) {
    regression_adjust(post, table.column_norms, r.weighting);
    if (post.status != AdjustmentStatus::Applied) {
      err << "warning: regression adjustment " << to_string(post.status) << '\n';
    }
  }
  write_file(dir / "posterior.csv", [&](std::ostream& o) { write_posterior_csv(o, post); });
  out << "accepted " << post.accepted.size() << " of " << table.rows.size() << " rows\n";
  return kOk;
}

LoessCurve sweep_trend(const LagSweepResult& res, const std::vector<Iteration>& lags, double span) {
  std::vector<double> x, y;
  for (auto l : lags) {
    x.push_back(static_cast<double>(l));
    y.push_back(res.find("two-wave", l, true).mean);
  }
  return loess_fit(x, y, span);
}

int cmd_lag_sweep(RunConfig& c, const fs::path& dir, std::ostream& out) {
  if (c.table_count == 0) c.table_count = 2000;
  const auto r = resolve(c);
  SweepConfig s;
  s.model = r.model;
  s.prior = r.prior;
  s.lags = parse_list<Iteration>(c.lags, "lags", [](std::string_view v) { return parse_int(v); });
  std::sort(s.lags.begin(), s.lags.end());
  s.lags.erase(std::unique(s.lags.begin(), s.lags.end()), s.lags.end());
  s.include_one_wave = c.one_wave;
  s.truth_count = c.truth_count;
  s.table_count = c.table_count;
  s.accepted = c.accepted;
  s.weighting = r.weighting;
  s.master_seed = c.seed;
  s.threads = c.threads;
  const auto res = lag_sweep(s);
  write_file(dir / "rmse_by_lag.csv",
             [&](std::ostream& o) { write_rmse_by_lag_csv(o, res.aggregates); });
  write_file(dir / "rmse_records.csv",
             [&](std::ostream& o) { write_rmse_records_csv(o, res.records); });
  if (s.lags.size() >= 3) {
    const auto curve = sweep_trend(res, s.lags, c.span);
    write_file(dir / "loess.csv", [&](std::ostream& o) { write_loess_csv(o, curve); });
    write_loess_meta(dir / "loess.meta", curve);
  }
  out << "lag sweep: " << s.lags.size() << " lags, " << s.truth_count << " truths, "
      << res.aggregates.size() << " aggregate rows\n";
  return kOk;
}

int cmd_mapping(RunConfig& c, const fs::path& dir, std::ostream& out) {
  const auto r = resolve(c);
  MappingConfig m;
  m.model = r.model;
  m.prior = r.prior;
  m.fixed = r.params;
  m.param = c.mapping_param;
  m.grid = parse_list<double>(c.grid, "grid", [](std::string_view v) { return parse_double(v); });
  if (c.mapping_mode == "fixed") {
    m.mode = MappingMode::FixedOthers;
  } else if (c.mapping_mode == "prior") {
    m.mode = MappingMode::PriorOthers;
  } else {
    throw std::invalid_argument("mapping-mode must be fixed or prior");
  }
  m.runs_per_value = c.runs_per_value;
  m.master_seed = c.seed;
  m.threads = c.threads;
  const auto res = mapping_sweep(m);
  write_file(dir / "mapping.csv",
             [&](std::ostream& o) { write_mapping_csv(o, m.param, res.runs); });
  write_file(dir / "mapping_medians.csv",
             [&](std::ostream& o) { write_mapping_medians_csv(o, res.rows); });
  out << "mapping: " << res.runs.size() << " runs of " << m.param << '\n';
  return kOk;
}

int cmd_loess(RunConfig& c, const fs::path& dir, std::ostream& out) {
  if (c.loess_input.empty()) throw std::invalid_argument("loess needs --loess-input");
  CsvTable csv;
  try {
    csv = read_csv(c.loess_input);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  std::vector<double> x, y;
  try {
    const auto cx = csv.column(c.x_column);
    const auto cy = csv.column(c.y_column);
    for (const auto& row : csv.rows) {
      // Rows without a coordinate (one-wave lag) are not points on the curve.
      if (row[cx] == "NA" || row[cy] == "NA") continue;
      x.push_back(parse_double(row[cx]));
      y.push_back(parse_double(row[cy]));
    }
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  // Repeated x (one row per truth) collapse to their mean y; the fit needs
  // distinct x. The map also sorts, so the output reads as a curve.
  std::map<double, std::pair<double, std::size_t>> by_x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& [sum, count] = by_x[x[i]];
    sum += y[i];
    ++count;
  }
  std::vector<double> xs, ys;
  for (const auto& [xv, acc] : by_x) {
    xs.push_back(xv);
    ys.push_back(acc.first / static_cast<double>(acc.second));
  }
  const auto curve = loess_fit(xs, ys, c.span);
  write_file(dir / "loess.csv", [&](std::ostream& o) { write_loess_csv(o, curve); });
  write_loess_meta(dir / "loess.meta", curve);
  out << "loess: " << curve.x.size() << " points\n";
  return kOk;
}

void add_options(CLI::App& app, RunConfig& c) {
  // A repeated option overrides the earlier value (flags after --config).
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  // Comma lists arrive split when read from a config file; rejoin them.
  auto list = [](CLI::Option* o) {
    o->multi_option_policy(CLI::MultiOptionPolicy::Join)->delimiter(',');
  };
  app.add_option("--output-dir", c.output_dir,
                 std::string("Directory for all outputs (default: $") + kOutputDirEnv +
                     " or ./netabc-out)");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");

  app.add_option("--n", c.n, "Initial / target population size");
  app.add_option("--mu", c.mu, "Per-iteration departure probability");
  app.add_option("--burn-in", c.burn_in, "Unrecorded iterations before observation");
  app.add_option("--window", c.window, "Recall window in iterations");
  app.add_option("--rho", c.rho, "Steady-willingness probability (simulate/infer/mapping)");
  app.add_option("--sigma", c.sigma, "Steady dissolution probability");
  app.add_option("--omega0", c.omega0, "Casual-willingness probability when single");
  app.add_option("--omega1", c.omega1, "Casual-willingness probability when partnered");

  app.add_option("--design", c.design, "one-wave or two-wave");
  app.add_option("--lag", c.lag, "Iterations between the two waves");
  app.add_option("--record-span", c.record_span, "Recorded iterations (simulate; 0 = design span)");
  app.add_option("--export-from", c.export_from, "First exported iteration (0 = span start)");
  app.add_option("--export-to", c.export_to, "Last exported iteration (0 = span end)");
  app.add_option("--events", c.events, "Event log to summarize (default <output-dir>/events.log)");

  list(app.add_option("--prior-rho", c.prior_rho, "Bounds lo,hi of the uniform prior on 1/rho"));
  list(app.add_option("--prior-sigma", c.prior_sigma, "Bounds of the prior on 1/sigma"));
  list(app.add_option("--prior-omega0", c.prior_omega0, "Bounds of the prior on 1/omega0"));
  list(app.add_option("--prior-omega1", c.prior_omega1, "Bounds of the prior on 1/omega1"));

  app.add_option("--table-count", c.table_count,
                 "Reference table rows (default 10000; 2000 for lag-sweep)");
  app.add_option("--accept-fraction", c.accept_fraction, "Fraction of rows accepted by infer");
  app.add_option("--adjust", c.adjust, "Apply regression adjustment (true/false)");
  app.add_option("--weighting", c.weighting, "Adjustment weights: epanechnikov or uniform");
  app.add_option("--table", c.table, "Reference table path prefix (default <output-dir>/reftable)");
  app.add_option("--observed", c.observed,
                 "Observed summaries CSV for infer (default: simulate from --rho.. --omega1)");

  list(app.add_option("--lags", c.lags, "Comma-separated two-wave lags for lag-sweep"));
  app.add_option("--one-wave", c.one_wave, "Include the one-wave design in lag-sweep");
  app.add_option("--truth-count", c.truth_count, "Ground truths per design in lag-sweep");
  app.add_option("--accepted", c.accepted, "Accepted rows per posterior in lag-sweep");

  app.add_option("--mapping-param", c.mapping_param, "Swept parameter: rho, sigma, omega0, omega1");
  app.add_option("--mapping-mode", c.mapping_mode, "fixed or prior");
  list(app.add_option("--grid", c.grid, "Comma-separated grid (default 0.05,0.10,...,1.00)"));
  app.add_option("--runs-per-value", c.runs_per_value, "Simulations per grid value");

  app.add_option("--loess-input", c.loess_input, "CSV with the points to smooth (NA rows skipped, repeated x averaged)");
  app.add_option("--x-column", c.x_column, "Column holding x");
  app.add_option("--y-column", c.y_column, "Column holding y");
  app.add_option("--span", c.span, "Loess span in (0, 1]");
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Partnership-network simulation and ABC inference", "netabc"};
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");
  app.set_version_flag("--version", NETABC_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  add_options(app, c);

  using Handler = std::function<int(RunConfig&, const fs::path&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;
  auto add = [&](const char* name, const char* help, Handler h) {
    commands.emplace_back(app.add_subcommand(name, help), std::move(h));
  };
  add("simulate", "Simulate one trajectory; write events.log and edges.csv",
      [&](RunConfig& rc, const fs::path& d) { return cmd_simulate(rc, d, out); });
  add("summarize", "Summaries of a stored trajectory; write summaries.csv",
      [&](RunConfig& rc, const fs::path& d) { return cmd_summarize(rc, d, out); });
  add("reftable", "Build an ABC reference table",
      [&](RunConfig& rc, const fs::path& d) { return cmd_reftable(rc, d, out); });
  add("infer", "Accept/reject (and adjust) against a reference table; write posterior.csv",
      [&](RunConfig& rc, const fs::path& d) { return cmd_infer(rc, d, out, err); });
  add("lag-sweep", "Posterior RMSE across observation designs",
      [&](RunConfig& rc, const fs::path& d) { return cmd_lag_sweep(rc, d, out); });
  add("mapping", "Summary statistics across a parameter grid",
      [&](RunConfig& rc, const fs::path& d) { return cmd_mapping(rc, d, out); });
  add("loess", "Loess smoothing with pointwise 95% intervals",
      [&](RunConfig& rc, const fs::path& d) { return cmd_loess(rc, d, out); });

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << NETABC_VERSION << '\n';
    return kOk;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const CLI::ConversionError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  if (c.output_dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    c.output_dir = env && *env ? env : "netabc-out";
  }

  for (auto& [sub, handler] : commands) {
    if (!sub->parsed()) continue;
    try {
      const fs::path dir(c.output_dir);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      const int status = handler(c, dir);
      write_run_meta(dir, sub->get_name(), c);
      return status;
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kIoFailure;
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kInvalidConfig;
    } catch (const std::out_of_range& e) {
      err << "error: " << e.what() << '\n';
      return kInvalidConfig;
    } catch (const std::runtime_error& e) {
      err << "error: " << e.what() << '\n';
      return kIoFailure;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << '\n';
      return kInternalError;
    }
  }
  return kUsageError;
}

}  // namespace netabc::cli
