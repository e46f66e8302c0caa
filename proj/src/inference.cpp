#include "netabc/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "netabc/csv.hpp"
#include "netabc/parallel.hpp"

namespace netabc {

Theta to_theta(const ParamSet& p) { return {p.rho, p.sigma, p.omega0, p.omega1}; }

void PriorSpec::validate() const {
  const std::array<std::pair<const char*, Interval>, 4> all = {
      {{"rho", inv_rho}, {"sigma", inv_sigma}, {"omega0", inv_omega0}, {"omega1", inv_omega1}}};
  for (const auto& [name, iv] : all) {
    if (!(iv.lo >= 1.0 && iv.hi >= iv.lo && std::isfinite(iv.hi))) {
      throw std::invalid_argument(std::string("prior on 1/") + name +
                                  " needs 1 <= lo <= hi < inf");
    }
  }
}

void ModelConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (!(mu >= 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must be in [0, 1]");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be non-negative");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
}

ParamSet sample_prior(const PriorSpec& spec, const ModelConfig& model, Rng& rng) {
  ParamSet p;
  p.rho = 1.0 / rng.uniform(spec.inv_rho.lo, spec.inv_rho.hi);
  p.sigma = 1.0 / rng.uniform(spec.inv_sigma.lo, spec.inv_sigma.hi);
  p.omega0 = 1.0 / rng.uniform(spec.inv_omega0.lo, spec.inv_omega0.hi);
  p.omega1 = 1.0 / rng.uniform(spec.inv_omega1.lo, spec.inv_omega1.hi);
  p.mu = model.mu;
  p.n = model.n;
  return p;
}

std::vector<ColumnNorm> column_norms(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return {};
  const std::size_t dim = rows.front().size();
  std::vector<ColumnNorm> norms(dim);
  const auto count = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < dim; ++j) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[j];
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[j] - mean) * (r[j] - mean);
    norms[j].mean = mean;
    norms[j].sd = rows.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  }
  return norms;
}

void ReferenceTable::refresh_norms() {
  std::vector<std::vector<double>> summaries;
  std::vector<std::vector<double>> params;
  summaries.reserve(rows.size());
  params.reserve(rows.size());
  for (const auto& r : rows) {
    summaries.push_back(r.summaries);
    const Theta t = to_theta(r.params);
    params.emplace_back(t.begin(), t.end());
  }
  column_norms = netabc::column_norms(summaries);
  const auto pn = netabc::column_norms(params);
  for (std::size_t k = 0; k < kInferredParams && k < pn.size(); ++k) param_norms[k] = pn[k];
}

std::vector<ReferenceTable> build_reference_tables(std::span<const Design> designs,
                                                   std::size_t count, const ModelConfig& model,
                                                   const PriorSpec& prior,
                                                   std::uint64_t master_seed, unsigned threads) {
  model.validate();
  prior.validate();
  if (count < 2) throw std::invalid_argument("reference table needs at least 2 rows");
  if (designs.empty()) throw std::invalid_argument("no designs requested");

  Iteration span = 1;
  for (const auto& d : designs) span = std::max(span, d.record_span(model.window));

  struct Draw {
    ParamSet params;
    std::vector<std::vector<double>> vectors;  // one per design
  };
  std::vector<Draw> draws(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng prior_rng(stream_seed(master_seed, Stream::TablePrior, i));
    Draw& d = draws[i];
    d.params = sample_prior(prior, model, prior_rng);
    const auto sim = simulate(d.params, model.burn_in, span,
                              stream_seed(master_seed, Stream::TableSimulation, i));
    d.vectors.reserve(designs.size());
    for (const auto& design : designs) {
      d.vectors.push_back(design_summaries(sim.log, design, model.window).values);
    }
  });

  std::vector<ReferenceTable> tables(designs.size());
  for (std::size_t k = 0; k < designs.size(); ++k) {
    auto& t = tables[k];
    t.design = designs[k];
    t.model = model;
    t.prior = prior;
    t.master_seed = master_seed;
    t.rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      t.rows.push_back({i, draws[i].params, draws[i].vectors[k]});
    }
    t.refresh_norms();
  }
  return tables;
}

ReferenceTable build_reference_table(const Design& design, std::size_t count,
                                     const ModelConfig& model, const PriorSpec& prior,
                                     std::uint64_t master_seed, unsigned threads) {
  const Design designs[] = {design};
  return std::move(build_reference_tables(designs, count, model, prior, master_seed, threads)[0]);
}

double distance(std::span<const double> a, std::span<const double> b,
                std::span<const ColumnNorm> norms) {
  if (a.size() != b.size() || a.size() != norms.size()) {
    throw std::invalid_argument("distance: dimension mismatch");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (norms[j].sd <= 0.0) continue;
    const double z = (a[j] - b[j]) / norms[j].sd;
    sum += z * z;
  }
  return std::sqrt(sum);
}

std::vector<std::size_t> constant_columns(std::span<const ColumnNorm> norms) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < norms.size(); ++j)
    if (norms[j].sd <= 0.0) out.push_back(j);
  return out;
}

std::string to_string(AdjustmentStatus status) {
  switch (status) {
    case AdjustmentStatus::NotApplied: return "not-applied";
    case AdjustmentStatus::Applied: return "applied";
    case AdjustmentStatus::RankDeficient: return "rank-deficient";
    case AdjustmentStatus::NoRegressorSpread: return "no-regressor-spread";
  }
  return "unknown";
}

std::vector<Theta> Posterior::samples() const {
  if (!adjusted.empty()) return adjusted;
  std::vector<Theta> out;
  out.reserve(accepted.size());
  for (const auto& a : accepted) out.push_back(a.theta);
  return out;
}

std::size_t accept_count(double fraction, std::size_t rows) {
  const double k = std::ceil(fraction * static_cast<double>(rows) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, rows);
}

Posterior reject_sample(const ReferenceTable& table, std::span<const double> observed,
                        double accept_fraction) {
  if (table.rows.empty()) throw std::invalid_argument("reject_sample: empty reference table");
  if (!(accept_fraction > 0.0 && accept_fraction <= 1.0)) {
    throw std::invalid_argument("accept fraction must be in (0, 1]");
  }
  if (observed.size() != table.column_norms.size()) {
    throw std::invalid_argument("observed vector has " + std::to_string(observed.size()) +
                                " components, table has " +
                                std::to_string(table.column_norms.size()));
  }

  struct Scored {
    double d;
    std::size_t row;
  };
  std::vector<Scored> scored(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    scored[r] = {distance(table.rows[r].summaries, observed, table.column_norms), r};
  }
  const std::size_t keep = accept_count(accept_fraction, table.rows.size());
  auto by_distance = [&](const Scored& a, const Scored& b) {
    if (a.d != b.d) return a.d < b.d;
    return table.rows[a.row].sim_index < table.rows[b.row].sim_index;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), by_distance);

  Posterior post;
  post.observed.assign(observed.begin(), observed.end());
  post.acceptance_fraction = static_cast<double>(keep) / static_cast<double>(table.rows.size());
  post.accepted.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    const auto& row = table.rows[scored[k].row];
    post.accepted.push_back({row.sim_index, to_theta(row.params), scored[k].d, row.summaries});
  }
  return post;
}

void regression_adjust(Posterior& post, std::span<const ColumnNorm> norms, Weighting weighting) {
  const std::size_t m = post.accepted.size();
  const std::size_t dim = post.observed.size();
  if (norms.size() != dim) throw std::invalid_argument("regression_adjust: norm dimension");
  if (m < dim + 2) {
    throw std::invalid_argument("regression adjustment needs at least " +
                                std::to_string(dim + 2) + " accepted rows, got " +
                                std::to_string(m));
  }

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < dim; ++j)
    if (norms[j].sd > 0.0) active.push_back(j);

  double d_max = 0.0;
  for (const auto& a : post.accepted) d_max = std::max(d_max, a.distance);

  Eigen::VectorXd w(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(active.size()));
  Eigen::MatrixXd y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(kInferredParams));
  bool spread = false;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& a = post.accepted[i];
    const auto r = static_cast<Eigen::Index>(i);
    double wi = 1.0;
    if (weighting == Weighting::Epanechnikov && d_max > 0.0) {
      const double u = a.distance / d_max;
      wi = 1.0 - u * u;
    }
    w(r) = wi;
    for (std::size_t c = 0; c < active.size(); ++c) {
      const std::size_t j = active[c];
      x(r, static_cast<Eigen::Index>(c)) = (a.summaries[j] - post.observed[j]) / norms[j].sd;
      if (wi > 0.0 && x(r, static_cast<Eigen::Index>(c)) != 0.0) spread = true;
    }
    for (std::size_t k = 0; k < kInferredParams; ++k) y(r, static_cast<Eigen::Index>(k)) = a.theta[k];
  }

  post.adjusted.clear();
  post.adjusted.reserve(m);
  if (!spread) {
    for (const auto& a : post.accepted) post.adjusted.push_back(a.theta);
    post.status = AdjustmentStatus::NoRegressorSpread;
    return;
  }

  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd a_w = sw.asDiagonal() * design;
  const Eigen::MatrixXd y_w = sw.asDiagonal() * y;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> qr(a_w.rows(), a_w.cols());
  // Pivots below this fraction of the largest count as zero.
  qr.setThreshold(1e-10);
  qr.compute(a_w);
  // With collinear columns this is the minimum-norm solution; fitted values,
  // and hence the adjustment, do not depend on which solution is taken.
  const Eigen::MatrixXd beta = qr.solve(y_w);
  post.status = qr.rank() < design.cols() ? AdjustmentStatus::RankDeficient
                                          : AdjustmentStatus::Applied;

  const Eigen::MatrixXd shift = x * beta.bottomRows(x.cols());
  for (std::size_t i = 0; i < m; ++i) {
    Theta t{};
    for (std::size_t k = 0; k < kInferredParams; ++k) {
      const double v = post.accepted[i].theta[k] -
                       shift(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      t[k] = std::clamp(v, 0.0, 1.0);
    }
    post.adjusted.push_back(t);
  }
}

void write_posterior_csv(std::ostream& out, const Posterior& post) {
  out << "sim_index,distance,rho,sigma,omega0,omega1,adj_rho,adj_sigma,adj_omega0,adj_omega1\n";
  for (std::size_t i = 0; i < post.accepted.size(); ++i) {
    const auto& a = post.accepted[i];
    out << a.sim_index << ',' << format_double(a.distance);
    for (double v : a.theta) out << ',' << format_double(v);
    for (std::size_t k = 0; k < kInferredParams; ++k) {
      out << ',' << (post.adjusted.empty() ? std::string("NA") : format_double(post.adjusted[i][k]));
    }
    out << '\n';
  }
}

}  // namespace netabc
