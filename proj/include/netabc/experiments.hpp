#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netabc/inference.hpp"

namespace netabc {

struct RmseResult {
  Theta per_param{};
  double total = 0.0;
};

/// Root-mean-squared error of posterior samples about the truth, with both
/// sides first standardized by the reference table's parameter norms.
/// total^2 equals the sum of per-parameter squares. Throws
/// std::invalid_argument for zero samples or a non-positive sd.
RmseResult rmse(std::span<const Theta> samples, const Theta& truth,
                const std::array<ColumnNorm, kInferredParams>& param_norms);

struct SweepConfig {
  ModelConfig model{500, 0.0, 1000, kDefaultWindow};
  PriorSpec prior;
  std::vector<Iteration> lags{0, 10, 25, 50, 100, 150};
  bool include_one_wave = true;
  std::size_t truth_count = 20;
  std::size_t table_count = 2000;
  std::size_t accepted = 100;  // rows kept per posterior
  Weighting weighting = Weighting::Epanechnikov;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;

  void validate() const;
};

/// One posterior evaluation. design is "one-wave", "two-wave" or "prior"
/// (samples drawn straight from the prior); lag is set for two-wave only.
struct RmseRecord {
  std::string design;
  std::optional<Iteration> lag;
  std::size_t truth_index = 0;
  bool adjusted = false;
  RmseResult error;
};

/// Mean and standard error over truths of one (design, lag, adjusted, param)
/// cell; param is one of the inferred parameter names or "total".
struct RmseAggregate {
  std::string design;
  std::optional<Iteration> lag;
  bool adjusted = false;
  std::string param;
  double mean = 0.0;
  double se = 0.0;
  std::size_t n_truths = 0;
};

struct LagSweepResult {
  std::vector<RmseRecord> records;
  std::vector<RmseAggregate> aggregates;

  // Aggregate lookup; throws std::out_of_range if the cell is missing.
  const RmseAggregate& find(std::string_view design, std::optional<Iteration> lag, bool adjusted,
                            std::string_view param = "total") const;
};

/// Average posterior error as a function of the observation design.
///
/// Builds one reference table per design (one-wave and one two-wave design
/// per lag) from shared prior draws, then for each ground truth drawn from
/// the prior stream (master_seed, TruthPrior, i) simulates an observation and
/// evaluates rejection and regression-adjusted posteriors against it. A
/// "prior" baseline uses `accepted` fresh prior draws per truth.
LagSweepResult lag_sweep(const SweepConfig& config);

// "design,lag,adjusted,param,rmse_mean,rmse_se,n_truths"
void write_rmse_by_lag_csv(std::ostream& out, std::span<const RmseAggregate> rows);
// Per-truth rows: "design,lag,adjusted,truth_index,rho,sigma,omega0,omega1,total"
void write_rmse_records_csv(std::ostream& out, std::span<const RmseRecord> rows);

enum class MappingMode { FixedOthers, PriorOthers };

struct MappingConfig {
  ModelConfig model{1000, 0.0, 1000, kDefaultWindow};
  PriorSpec prior;
  // Values held for the non-swept parameters in FixedOthers mode.
  ParamSet fixed{0.3, 0.1, 0.4, 0.2, 0.0, 1000};
  std::string param = "sigma";
  std::vector<double> grid;  // defaults to 0.05, 0.10, ..., 1.00 when empty
  MappingMode mode = MappingMode::FixedOthers;
  std::size_t runs_per_value = 100;
  std::uint64_t master_seed = 1;
  unsigned threads = 0;

  void validate() const;
};

std::vector<double> default_mapping_grid();

struct MappingRun {
  double value = 0.0;
  std::size_t run = 0;
  SummaryVector summaries;
};

struct MappingRow {
  std::string param;
  double value = 0.0;
  std::size_t summary = 0;  // 1..4
  std::vector<double> runs;
  double median = 0.0;
};

struct MappingResult {
  std::vector<MappingRun> runs;  // grid-major, then run index
  std::vector<MappingRow> rows;  // grid-major, then summary index
};

/// Summary statistics as a function of one generative parameter. Run k at
/// grid point g uses stream index g * runs_per_value + k, so results do not
/// depend on thread count. Summaries are those of a single wave; undefined
/// s2 values enter as 0.
MappingResult mapping_sweep(const MappingConfig& config);

double median(std::vector<double> values);

// "param,value,run,s1,s2,s3,s4"
void write_mapping_csv(std::ostream& out, const std::string& param,
                       std::span<const MappingRun> runs);
// "param,value,summary,median"
void write_mapping_medians_csv(std::ostream& out, std::span<const MappingRow> rows);

struct LoessCurve {
  std::vector<double> x;
  std::vector<double> y;
  double span = 0.75;
  std::vector<double> fit;
  std::vector<double> se;          // pointwise standard error of the fit
  std::vector<double> half_width;  // 1.96 * se
  double residual_sd = 0.0;
  double residual_df = 0.0;  // tr((I - L)'(I - L))
  std::string interval_method;
};

/// Local-linear loess with tricube weights over the ceil(span * N) nearest
/// points, evaluated at every input x. The neighbourhood is widened until at
/// least two distinct x carry positive weight. Pointwise 95% intervals use
/// the smoother row norm and a global residual variance with a normal
/// quantile (a large-sample approximation). Needs at least 3 points with
/// distinct x and span in (0, 1]; throws std::invalid_argument otherwise.
LoessCurve loess_fit(std::span<const double> x, std::span<const double> y, double span = 0.75);

// "x,fit,lo95,hi95"
void write_loess_csv(std::ostream& out, const LoessCurve& curve);

}  // namespace netabc
