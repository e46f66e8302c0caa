#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netabc/netmodel.hpp"
#include "netabc/rng.hpp"
#include "netabc/summaries.hpp"

namespace netabc {

inline constexpr std::size_t kInferredParams = 4;

// Inferred parameters in the order rho, sigma, omega0, omega1.
using Theta = std::array<double, kInferredParams>;

inline constexpr std::array<const char*, kInferredParams> kParamNames = {"rho", "sigma", "omega0",
                                                                         "omega1"};

Theta to_theta(const ParamSet& p);

struct Interval {
  double lo = 1.0;
  double hi = 1.0;
};

/// Uniform priors on mean waiting times (months), i.e. on the inverse of each
/// inferred probability.
struct PriorSpec {
  Interval inv_rho{1.0, 50.0};
  Interval inv_sigma{1.0, 90.0};
  Interval inv_omega0{1.0, 40.0};
  Interval inv_omega1{1.0, 61.0};

  // Every interval needs 1 <= lo <= hi. Throws std::invalid_argument.
  void validate() const;
};

/// Settings shared by every simulation that feeds a reference table or an
/// observation: fixed (non-inferred) parameters and observation timing.
struct ModelConfig {
  std::int64_t n = 1000;
  double mu = 0.0;
  Iteration burn_in = 1000;
  Iteration window = kDefaultWindow;

  void validate() const;
};

// Draws each waiting time uniformly and returns reciprocals; mu and n come
// from the model config. Consumes exactly four uniforms.
ParamSet sample_prior(const PriorSpec& spec, const ModelConfig& model, Rng& rng);

struct ColumnNorm {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)

  bool operator==(const ColumnNorm&) const = default;
};

// Two-pass mean / sample sd of each column of `rows`.
std::vector<ColumnNorm> column_norms(std::span<const std::vector<double>> rows);

struct ReferenceRow {
  std::size_t sim_index = 0;
  ParamSet params;
  std::vector<double> summaries;

  bool operator==(const ReferenceRow&) const = default;
};

struct ReferenceTable {
  Design design;
  ModelConfig model;
  PriorSpec prior;
  std::uint64_t master_seed = 0;
  std::vector<ReferenceRow> rows;
  std::vector<ColumnNorm> column_norms;
  std::array<ColumnNorm, kInferredParams> param_norms{};

  // Recomputes both norm sets from `rows`.
  void refresh_norms();
};

/// Simulates `count` prior draws. Row i uses the prior stream
/// (master_seed, TablePrior, i) and simulation stream
/// (master_seed, TableSimulation, i); output does not depend on `threads`.
ReferenceTable build_reference_table(const Design& design, std::size_t count,
                                     const ModelConfig& model, const PriorSpec& prior,
                                     std::uint64_t master_seed, unsigned threads = 0);

/// One table per design from a single simulation per index, run long enough
/// for the longest design. Each result equals build_reference_table for that
/// design alone: the recorded prefix of a trajectory does not depend on how
/// far it is continued.
std::vector<ReferenceTable> build_reference_tables(std::span<const Design> designs,
                                                   std::size_t count, const ModelConfig& model,
                                                   const PriorSpec& prior,
                                                   std::uint64_t master_seed,
                                                   unsigned threads = 0);

// Euclidean distance after dividing each component by its sd. Components
// with sd == 0 are skipped (see constant_columns).
double distance(std::span<const double> a, std::span<const double> b,
                std::span<const ColumnNorm> norms);

// Indices of columns with zero spread; they carry no information.
std::vector<std::size_t> constant_columns(std::span<const ColumnNorm> norms);

struct AcceptedRow {
  std::size_t sim_index = 0;
  Theta theta{};
  double distance = 0.0;
  std::vector<double> summaries;
};

enum class AdjustmentStatus {
  NotApplied,        // rejection only
  Applied,           // full-rank weighted regression
  RankDeficient,     // collinear regressors; minimum-norm least-squares solution used
  NoRegressorSpread  // every weighted regressor is zero; samples unchanged
};

std::string to_string(AdjustmentStatus status);

struct Posterior {
  std::vector<double> observed;
  std::vector<AcceptedRow> accepted;  // ascending distance, ties by sim_index
  std::vector<Theta> adjusted;        // empty unless regression_adjust ran
  double acceptance_fraction = 0.0;
  AdjustmentStatus status = AdjustmentStatus::NotApplied;

  std::vector<Theta> samples() const;  // adjusted if present, else accepted
};

// Number of rows kept for a fraction of a table: ceil(fraction * rows),
// with a 1e-9 slack so that e.g. 0.07 * 100 keeps 7 rows.
std::size_t accept_count(double fraction, std::size_t rows);

/// Keeps the accept_count(fraction, rows) rows closest to `observed` under the
/// table's column norms. Throws std::invalid_argument for an empty table,
/// fraction outside (0, 1] or a dimension mismatch.
Posterior reject_sample(const ReferenceTable& table, std::span<const double> observed,
                        double accept_fraction);

enum class Weighting { Epanechnikov, Uniform };

/// Local-linear regression adjustment of each inferred parameter.
///
/// Regresses theta on the normalized offsets (s_i - s_obs) / sd with weights
/// 1 - (d_i / d_max)^2 (or 1 for Uniform; all 1 when d_max == 0) and sets
/// theta_i - beta' x_i, clamped to [0, 1]. Needs at least dimension + 2
/// accepted rows (std::invalid_argument otherwise).
void regression_adjust(Posterior& posterior, std::span<const ColumnNorm> norms,
                       Weighting weighting = Weighting::Epanechnikov);

// Reference table CSV plus a key=value metadata sidecar (see table_io.cpp).
void write_reference_table(const ReferenceTable& table, const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path);
ReferenceTable read_reference_table(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& meta_path);

// Headered CSV "sim_index,distance,rho,...,adj_omega1"; adj_* are NA when the
// posterior was not adjusted.
void write_posterior_csv(std::ostream& out, const Posterior& posterior);

}  // namespace netabc
