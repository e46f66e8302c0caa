#include "netabc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "netabc/csv.hpp"
#include "netabc/parallel.hpp"

namespace netabc {

RmseResult rmse(std::span<const Theta> samples, const Theta& truth,
                const std::array<ColumnNorm, kInferredParams>& param_norms) {
  if (samples.empty()) throw std::invalid_argument("rmse: no posterior samples");
  for (const auto& n : param_norms) {
    if (!(n.sd > 0.0)) throw std::invalid_argument("rmse: parameter sd must be positive");
  }
  Theta sumsq{};
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < kInferredParams; ++j) {
      // Standardizing both sides by (x - mean) / sd leaves the mean out of the difference.
      const double d = (truth[j] - s[j]) / param_norms[j].sd;
      sumsq[j] += d * d;
    }
  }
  const auto k = static_cast<double>(samples.size());
  RmseResult r;
  double total = 0.0;
  for (std::size_t j = 0; j < kInferredParams; ++j) {
    r.per_param[j] = std::sqrt(sumsq[j] / k);
    total += sumsq[j] / k;
  }
  r.total = std::sqrt(total);
  return r;
}

void SweepConfig::validate() const {
  model.validate();
  prior.validate();
  if (lags.empty() && !include_one_wave) throw std::invalid_argument("lag sweep has no designs");
  for (auto l : lags)
    if (l < 0) throw std::invalid_argument("lags must be non-negative");
  if (truth_count < 1) throw std::invalid_argument("truth_count must be at least 1");
  if (table_count < 2) throw std::invalid_argument("table_count must be at least 2");
  if (accepted < 1 || accepted > table_count) {
    throw std::invalid_argument("accepted must be in [1, table_count]");
  }
  const std::size_t widest = lags.empty() ? kSummaryCount : 2 * kSummaryCount;
  if (accepted < widest + 2) {
    throw std::invalid_argument("regression adjustment needs accepted >= " +
                                std::to_string(widest + 2));
  }
}

const RmseAggregate& LagSweepResult::find(std::string_view design, std::optional<Iteration> lag,
                                          bool adjusted, std::string_view param) const {
  for (const auto& a : aggregates) {
    if (a.design == design && a.lag == lag && a.adjusted == adjusted && a.param == param) return a;
  }
  throw std::out_of_range("no aggregate for design " + std::string(design));
}

namespace {

struct Cell {
  std::string design;
  std::optional<Iteration> lag;
  bool adjusted;
};

void aggregate_cell(const Cell& cell, std::span<const RmseRecord> records,
                    std::vector<RmseAggregate>& out) {
  std::vector<const RmseRecord*> members;
  for (const auto& r : records) {
    if (r.design == cell.design && r.lag == cell.lag && r.adjusted == cell.adjusted) {
      members.push_back(&r);
    }
  }
  if (members.empty()) return;
  std::sort(members.begin(), members.end(),
            [](const RmseRecord* a, const RmseRecord* b) { return a->truth_index < b->truth_index; });
  for (std::size_t j = 0; j <= kInferredParams; ++j) {
    auto value = [&](const RmseRecord* r) {
      return j < kInferredParams ? r->error.per_param[j] : r->error.total;
    };
    const auto n = static_cast<double>(members.size());
    double sum = 0.0;
    for (const auto* r : members) sum += value(r);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto* r : members) ss += (value(r) - mean) * (value(r) - mean);
    const double se = members.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    out.push_back({cell.design, cell.lag, cell.adjusted,
                   j < kInferredParams ? kParamNames[j] : "total", mean, se, members.size()});
  }
}

}  // namespace

LagSweepResult lag_sweep(const SweepConfig& config) {
  config.validate();

  std::vector<Design> designs;
  if (config.include_one_wave) designs.push_back(Design::one_wave());
  for (auto l : config.lags) designs.push_back(Design::two_wave(l));

  const auto tables = build_reference_tables(designs, config.table_count, config.model,
                                             config.prior, config.master_seed, config.threads);
  const auto& param_norms = tables.front().param_norms;
  const double fraction =
      static_cast<double>(config.accepted) / static_cast<double>(config.table_count);

  Iteration span = 1;
  for (const auto& d : designs) span = std::max(span, d.record_span(config.model.window));

  // Per truth: [prior, then (unadjusted, adjusted) per design].
  std::vector<std::vector<RmseRecord>> per_truth(config.truth_count);
  parallel_for(config.truth_count, config.threads, [&](std::size_t i) {
    Rng truth_rng(stream_seed(config.master_seed, Stream::TruthPrior, i));
    const ParamSet truth_params = sample_prior(config.prior, config.model, truth_rng);
    const Theta truth = to_theta(truth_params);
    const auto sim = simulate(truth_params, config.model.burn_in, span,
                              stream_seed(config.master_seed, Stream::TruthSimulation, i));
    auto& out = per_truth[i];

    Rng baseline_rng(stream_seed(config.master_seed, Stream::PriorBaseline, i));
    std::vector<Theta> prior_samples;
    prior_samples.reserve(config.accepted);
    for (std::size_t k = 0; k < config.accepted; ++k) {
      prior_samples.push_back(to_theta(sample_prior(config.prior, config.model, baseline_rng)));
    }
    out.push_back({"prior", std::nullopt, i, false, rmse(prior_samples, truth, param_norms)});

    for (std::size_t d = 0; d < designs.size(); ++d) {
      const auto observed = design_summaries(sim.log, designs[d], config.model.window);
      const std::optional<Iteration> lag =
          designs[d].kind == Design::Kind::TwoWave ? std::optional(designs[d].lag) : std::nullopt;
      Posterior post = reject_sample(tables[d], observed.values, fraction);
      out.push_back({designs[d].tag(), lag, i, false, rmse(post.samples(), truth, param_norms)});
      regression_adjust(post, tables[d].column_norms, config.weighting);
      out.push_back({designs[d].tag(), lag, i, true, rmse(post.samples(), truth, param_norms)});
    }
  });

  LagSweepResult result;
  const std::size_t per = per_truth.empty() ? 0 : per_truth.front().size();
  for (std::size_t slot = 0; slot < per; ++slot) {
    for (const auto& truth_records : per_truth) result.records.push_back(truth_records[slot]);
  }

  std::vector<Cell> cells{{"prior", std::nullopt, false}};
  for (const auto& d : designs) {
    const std::optional<Iteration> lag =
        d.kind == Design::Kind::TwoWave ? std::optional(d.lag) : std::nullopt;
    cells.push_back({d.tag(), lag, false});
    cells.push_back({d.tag(), lag, true});
  }
  for (const auto& c : cells) aggregate_cell(c, result.records, result.aggregates);
  return result;
}

namespace {

std::string lag_text(const std::optional<Iteration>& lag) {
  return lag ? std::to_string(*lag) : std::string("NA");
}

}  // namespace

void write_rmse_by_lag_csv(std::ostream& out, std::span<const RmseAggregate> rows) {
  out << "design,lag,adjusted,param,rmse_mean,rmse_se,n_truths\n";
  for (const auto& r : rows) {
    out << r.design << ',' << lag_text(r.lag) << ',' << (r.adjusted ? 1 : 0) << ',' << r.param
        << ',' << format_double(r.mean) << ',' << format_double(r.se) << ',' << r.n_truths << '\n';
  }
}

void write_rmse_records_csv(std::ostream& out, std::span<const RmseRecord> rows) {
  out << "design,lag,adjusted,truth_index,rho,sigma,omega0,omega1,total\n";
  for (const auto& r : rows) {
    out << r.design << ',' << lag_text(r.lag) << ',' << (r.adjusted ? 1 : 0) << ','
        << r.truth_index;
    for (double v : r.error.per_param) out << ',' << format_double(v);
    out << ',' << format_double(r.error.total) << '\n';
  }
}

std::vector<double> default_mapping_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

namespace {

double& swept_field(ParamSet& p, const std::string& name) {
  if (name == "rho") return p.rho;
  if (name == "sigma") return p.sigma;
  if (name == "omega0") return p.omega0;
  if (name == "omega1") return p.omega1;
  throw std::invalid_argument("unknown mapping parameter '" + name +
                              "' (expected rho, sigma, omega0 or omega1)");
}

}  // namespace

void MappingConfig::validate() const {
  model.validate();
  prior.validate();
  ParamSet probe;
  swept_field(probe, param);
  for (double g : grid) {
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("mapping grid values must be in (0, 1]");
  }
  if (runs_per_value < 1) throw std::invalid_argument("runs_per_value must be at least 1");
  if (mode == MappingMode::FixedOthers) {
    ParamSet f = fixed;
    f.n = model.n;
    f.mu = model.mu;
    f.validate();
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

MappingResult mapping_sweep(const MappingConfig& config) {
  config.validate();
  const auto grid = config.grid.empty() ? default_mapping_grid() : config.grid;
  const std::size_t runs = config.runs_per_value;
  const std::size_t total = grid.size() * runs;

  MappingResult result;
  result.runs.resize(total);
  parallel_for(total, config.threads, [&](std::size_t idx) {
    const std::size_t g = idx / runs;
    ParamSet p;
    if (config.mode == MappingMode::FixedOthers) {
      p = config.fixed;
      p.n = config.model.n;
      p.mu = config.model.mu;
    } else {
      Rng prior_rng(stream_seed(config.master_seed, Stream::MappingPrior, idx));
      p = sample_prior(config.prior, config.model, prior_rng);
    }
    swept_field(p, config.param) = grid[g];
    const auto sim = simulate(p, config.model.burn_in, config.model.window,
                              stream_seed(config.master_seed, Stream::MappingSimulation, idx));
    const Iteration wave_end = sim.log.initial.iteration + config.model.window;
    result.runs[idx] = {grid[g], idx % runs, wave_summaries(sim.log, wave_end, config.model.window)};
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t s = 0; s < kSummaryCount; ++s) {
      MappingRow row;
      row.param = config.param;
      row.value = grid[g];
      row.summary = s + 1;
      for (std::size_t k = 0; k < runs; ++k) {
        row.runs.push_back(result.runs[g * runs + k].summaries.values()[s]);
      }
      row.median = median(row.runs);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_mapping_csv(std::ostream& out, const std::string& param,
                       std::span<const MappingRun> runs) {
  out << "param,value,run,s1,s2,s3,s4\n";
  for (const auto& r : runs) {
    out << param << ',' << format_double(r.value) << ',' << r.run;
    for (double v : r.summaries.values()) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_mapping_medians_csv(std::ostream& out, std::span<const MappingRow> rows) {
  out << "param,value,summary,median\n";
  for (const auto& r : rows) {
    out << r.param << ',' << format_double(r.value) << ",s" << r.summary << ','
        << format_double(r.median) << '\n';
  }
}

}  // namespace netabc
