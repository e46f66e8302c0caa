// Reference table files.
//
// <name>.csv   sim_index,rho,sigma,omega0,omega1,w1_s1,...,w1_s4[,w2_s1,...,w2_s4]
// <name>.meta  key=value lines ('#' starts a comment):
//   design          one-wave | two-wave
//   lag             iterations between waves (0 for one-wave)
//   window, n, mu, burn_in, master_seed, rows
//   prior.<param>   "lo,hi" bounds of the uniform prior on 1/<param>
//   column.<name>.mean / column.<name>.sd    summary normalization
//   param.<name>.mean / param.<name>.sd      prior-draw parameter normalization
//
// Norms are recomputed from the rows on load and must match the sidecar.

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "netabc/csv.hpp"
#include "netabc/inference.hpp"

namespace netabc {

namespace {

std::vector<std::string> summary_column_names(const Design& design) {
  std::vector<std::string> names;
  for (std::size_t w = 1; w <= design.wave_count(); ++w)
    for (std::size_t s = 1; s <= kSummaryCount; ++s)
      names.push_back("w" + std::to_string(w) + "_s" + std::to_string(s));
  return names;
}

Interval parse_interval(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw std::runtime_error("expected 'lo,hi', got '" + text + "'");
  return {parse_double(parts[0]), parse_double(parts[1])};
}

std::string format_interval(const Interval& iv) {
  return format_double(iv.lo) + "," + format_double(iv.hi);
}

}  // namespace

void write_reference_table(const ReferenceTable& table, const std::filesystem::path& csv_path,
                           const std::filesystem::path& meta_path) {
  const auto names = summary_column_names(table.design);
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "sim_index";
    for (const char* p : kParamNames) out << ',' << p;
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (const auto& row : table.rows) {
      out << row.sim_index;
      for (double v : to_theta(row.params)) out << ',' << format_double(v);
      for (double v : row.summaries) out << ',' << format_double(v);
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + csv_path.string());
  }

  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + meta_path.string());
  meta << "# netabc reference table metadata\n";
  meta << "design=" << table.design.tag() << '\n';
  meta << "lag=" << table.design.lag << '\n';
  meta << "window=" << table.model.window << '\n';
  meta << "n=" << table.model.n << '\n';
  meta << "mu=" << format_double(table.model.mu) << '\n';
  meta << "burn_in=" << table.model.burn_in << '\n';
  meta << "master_seed=" << table.master_seed << '\n';
  meta << "rows=" << table.rows.size() << '\n';
  meta << "prior.rho=" << format_interval(table.prior.inv_rho) << '\n';
  meta << "prior.sigma=" << format_interval(table.prior.inv_sigma) << '\n';
  meta << "prior.omega0=" << format_interval(table.prior.inv_omega0) << '\n';
  meta << "prior.omega1=" << format_interval(table.prior.inv_omega1) << '\n';
  for (std::size_t j = 0; j < names.size(); ++j) {
    meta << "column." << names[j] << ".mean=" << format_double(table.column_norms[j].mean) << '\n';
    meta << "column." << names[j] << ".sd=" << format_double(table.column_norms[j].sd) << '\n';
  }
  for (std::size_t k = 0; k < kInferredParams; ++k) {
    meta << "param." << kParamNames[k] << ".mean=" << format_double(table.param_norms[k].mean)
         << '\n';
    meta << "param." << kParamNames[k] << ".sd=" << format_double(table.param_norms[k].sd) << '\n';
  }
  if (!meta) throw std::runtime_error("write failed: " + meta_path.string());
}

ReferenceTable read_reference_table(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& meta_path) {
  const auto kv = read_key_values(meta_path);
  ReferenceTable table;
  table.design = parse_design(require_key(kv, "design"), parse_int(require_key(kv, "lag")));
  table.model.window = parse_int(require_key(kv, "window"));
  table.model.n = parse_int(require_key(kv, "n"));
  table.model.mu = parse_double(require_key(kv, "mu"));
  table.model.burn_in = parse_int(require_key(kv, "burn_in"));
  table.master_seed = parse_uint(require_key(kv, "master_seed"));
  table.prior.inv_rho = parse_interval(require_key(kv, "prior.rho"));
  table.prior.inv_sigma = parse_interval(require_key(kv, "prior.sigma"));
  table.prior.inv_omega0 = parse_interval(require_key(kv, "prior.omega0"));
  table.prior.inv_omega1 = parse_interval(require_key(kv, "prior.omega1"));
  table.model.validate();
  table.prior.validate();

  const auto csv = read_csv(csv_path);
  const auto names = summary_column_names(table.design);
  const auto c_index = csv.column("sim_index");
  std::array<std::size_t, kInferredParams> c_param{};
  for (std::size_t k = 0; k < kInferredParams; ++k) c_param[k] = csv.column(kParamNames[k]);
  std::vector<std::size_t> c_summary;
  for (const auto& n : names) c_summary.push_back(csv.column(n));

  const auto expected_rows = parse_uint(require_key(kv, "rows"));
  if (csv.rows.size() != expected_rows) {
    throw std::runtime_error(csv_path.string() + ": metadata declares " +
                             std::to_string(expected_rows) + " rows, file has " +
                             std::to_string(csv.rows.size()));
  }
  table.rows.reserve(csv.rows.size());
  for (const auto& r : csv.rows) {
    ReferenceRow row;
    row.sim_index = parse_uint(r[c_index]);
    if (row.sim_index != table.rows.size()) {
      throw std::runtime_error(csv_path.string() + ": sim_index must be contiguous from 0");
    }
    row.params.rho = parse_double(r[c_param[0]]);
    row.params.sigma = parse_double(r[c_param[1]]);
    row.params.omega0 = parse_double(r[c_param[2]]);
    row.params.omega1 = parse_double(r[c_param[3]]);
    row.params.mu = table.model.mu;
    row.params.n = table.model.n;
    for (auto c : c_summary) row.summaries.push_back(parse_double(r[c]));
    table.rows.push_back(std::move(row));
  }
  table.refresh_norms();

  for (std::size_t j = 0; j < names.size(); ++j) {
    const double mean = parse_double(require_key(kv, "column." + names[j] + ".mean"));
    const double sd = parse_double(require_key(kv, "column." + names[j] + ".sd"));
    if (mean != table.column_norms[j].mean || sd != table.column_norms[j].sd) {
      throw std::runtime_error(meta_path.string() + ": stored norms for " + names[j] +
                               " do not match the table rows");
    }
  }
  return table;
}

}  // namespace netabc
