// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 4-7 share one desk-scale sweep (desk_config).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netabc/cli.hpp"
#include "netabc/experiments.hpp"
#include "netabc/inference.hpp"
#include "netabc/netmodel.hpp"
#include "netabc/summaries.hpp"
#include "stat_oracles.hpp"

using namespace netabc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures without stopping at the first one.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_.size() < 5) failures_.push_back(what);
    }
  }
  void note(const std::string& s) { notes_.push_back(s); }
  Outcome outcome() const {
    std::string d;
    for (const auto& n : notes_) d += (d.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) d += (d.empty() ? "failed: " : "; failed: ") + f;
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

int g_failed = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++g_failed;
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << " (" << fmt(secs, 3)
            << " s): " << o.detail << std::endl;
}

// 1 -------------------------------------------------------------------------

Outcome model_laws() {
  Checker c;
  std::size_t steps = 0;
  const std::vector<ParamSet> sets = {{0.3, 0.1, 0.4, 0.2, 0.0, 200}, {0.9, 0.5, 0.9, 0.9, 0.0, 51},
                                      {0.05, 0.02, 0.1, 0.6, 0.0, 120},
                                      {0.5, 0.3, 0.5, 0.5, 0.03, 150}};
  for (std::uint64_t seed = 0; steps < 100000; ++seed) {
    const auto& p = sets[seed % sets.size()];
    auto s = init_state(p.n);
    Rng rng(seed);
    for (int i = 0; i < 1000; ++i, ++steps) {
      const auto before = s.nodes().size();
      const auto rec = step(s, p, rng);
      try {
        s.check_invariants();
      } catch (const std::logic_error& e) {
        c.expect(false, e.what());
      }
      // The casual edge set is exactly this step's formations.
      std::vector<Pair> formed;
      for (const auto& f : rec.casual_formations) formed.push_back(f.pair);
      std::sort(formed.begin(), formed.end());
      auto present = s.casual_edges();
      std::sort(present.begin(), present.end());
      c.expect(formed == present, "casual edge outlived its iteration");
      if (p.mu == 0.0) c.expect(s.nodes().size() == before, "population changed with mu = 0");
      c.expect(rec.steady_formations.size() == rec.steady_willing / 2, "floor(W/2) formations");
    }
  }
  c.note(std::to_string(steps) + " steps checked");

  for (double sigma : {0.1, 0.5}) {
    const auto run = simulate({0.3, sigma, 0.4, 0.2, 0.0, 1000}, 1000, 500, 2024);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rec : run.log.records) {
      for (const auto& d : rec.dissolutions) {
        if (d.start <= run.log.initial.iteration) continue;
        sum += static_cast<double>(d.end - d.start + 1);
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    c.note("sigma " + fmt(sigma) + ": mean duration " + fmt(mean) + " over " +
           std::to_string(count));
    c.expect(count >= 10000, "fewer than 1e4 completed relationships");
    c.expect(std::abs(mean - 1.0 / sigma) <= 0.05 / sigma, "duration mean off by > 5%");
  }
  return c.outcome();
}

// 2 -------------------------------------------------------------------------

Outcome matching_fairness() {
  Checker c;
  constexpr int trials = 10000;
  std::array<int, 5> excluded{};
  std::map<Pair, int> pairs;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 1000000);
    std::vector<NodeId> willing{0, 1, 2, 3, 4};
    std::array<bool, 5> used{};
    for (const auto& p : match_pairs(willing, rng)) {
      used[p.u] = used[p.v] = true;
      ++pairs[p];
    }
    for (int i = 0; i < 5; ++i) excluded[i] += used[i] ? 0 : 1;
  }
  double worst_excl = 0.0;
  for (int e : excluded) {
    const double f = e / double(trials);
    worst_excl = std::max(worst_excl, std::abs(f - 0.2));
    c.expect(std::abs(f - 0.2) <= 0.02, "exclusion frequency " + fmt(f));
  }
  // Each of the 10 pairs lies in 3 of the 15 equally likely matchings.
  const double se = std::sqrt(trials * 0.2 * 0.8);
  double worst_z = 0.0;
  c.expect(pairs.size() == 10, "not every pair observed");
  for (const auto& [p, n] : pairs) {
    const double z = std::abs(n - trials * 0.2) / se;
    worst_z = std::max(worst_z, z);
    c.expect(z <= 3.0, "pair frequency off by " + fmt(z) + " se");
  }
  c.note("max |exclusion - 0.2| = " + fmt(worst_excl) + ", max pair z = " + fmt(worst_z));
  return c.outcome();
}

// 3 -------------------------------------------------------------------------

Outcome abc_mechanics() {
  Checker c;
  const ModelConfig model{100, 0.0, 200, 12};
  const auto table = build_reference_table(Design::two_wave(10), 1000, model, {}, 17);

  for (double f : {0.01, 0.05, 0.07, 0.1, 0.333}) {
    const auto post = reject_sample(table, table.rows[5].summaries, f);
    const auto want = static_cast<std::size_t>(std::ceil(f * 1000 - 1e-9));
    c.expect(post.accepted.size() == want, "accepted " + std::to_string(post.accepted.size()));
  }
  const auto self = reject_sample(table, table.rows[321].summaries, 0.01);
  c.expect(self.accepted.front().distance == 0.0, "self-match distance");

  double worst_norm = 0.0;
  for (std::size_t j = 0; j < table.column_norms.size(); ++j) {
    const auto& n = table.column_norms[j];
    if (n.sd == 0.0) continue;
    long double sum = 0, ss = 0;
    for (const auto& r : table.rows) sum += (r.summaries[j] - n.mean) / n.sd;
    const long double mean = sum / table.rows.size();
    for (const auto& r : table.rows) {
      const long double z = (r.summaries[j] - n.mean) / n.sd - mean;
      ss += z * z;
    }
    const double sd = static_cast<double>(std::sqrt(ss / (table.rows.size() - 1)));
    worst_norm = std::max({worst_norm, std::abs(static_cast<double>(mean)), std::abs(sd - 1.0)});
  }
  c.expect(worst_norm < 1e-10, "normalized column moment off by " + fmt(worst_norm));

  std::size_t adjusted = 0;
  for (std::size_t probe = 0; probe < 1000; probe += 37) {
    auto post = reject_sample(table, table.rows[probe].summaries, 0.05);
    regression_adjust(post, table.column_norms);
    for (const auto& t : post.adjusted) {
      for (double v : t) c.expect(v >= 0.0 && v <= 1.0, "adjusted value outside [0, 1]");
      ++adjusted;
    }
  }

  // Parameters exactly affine in the normalized summaries.
  Rng rng(8);
  const std::vector<ColumnNorm> norms = {{0, 0.3}, {0, 1.5}, {0, 0.2}, {0, 0.4}};
  Posterior post;
  post.observed = {0.4, 3.0, 0.1, 0.5};
  for (std::size_t i = 0; i < 100; ++i) {
    AcceptedRow row{i, {}, rng.uniform(), {}};
    double x_sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double x = rng.uniform(-1, 1);
      x_sum += (j + 1) * x;
      row.summaries.push_back(post.observed[j] + x * norms[j].sd);
    }
    row.theta = {0.3 + 0.01 * x_sum, 0.1 - 0.005 * x_sum, 0.5 + 0.02 * x_sum, 0.25};
    post.accepted.push_back(row);
  }
  regression_adjust(post, norms);
  double worst_affine = 0.0;
  for (const auto& t : post.adjusted) {
    worst_affine = std::max({worst_affine, std::abs(t[0] - 0.3), std::abs(t[1] - 0.1),
                             std::abs(t[2] - 0.5), std::abs(t[3] - 0.25)});
  }
  c.expect(worst_affine <= 1e-8, "affine recovery error " + fmt(worst_affine));
  c.note("norm error " + fmt(worst_norm) + ", affine error " + fmt(worst_affine) + ", " +
         std::to_string(adjusted) + " adjusted samples in [0,1]");
  return c.outcome();
}

// 4-7: desk-scale lag sweep ---------------------------------------------------

const std::vector<Iteration> kLags = {0, 10, 25, 50, 100, 150};

SweepConfig desk_config() {
  SweepConfig s;
  s.model = {500, 0.0, 1000, 12};
  s.lags = kLags;
  s.include_one_wave = true;
  s.truth_count = 20;
  s.table_count = 2000;
  s.accepted = 100;
  s.master_seed = 20240601;
  return s;
}

const LagSweepResult& desk_sweep() {
  static const LagSweepResult result = [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = lag_sweep(desk_config());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "info: desk lag sweep (n=500, 2000 rows, 20 truths) took " << fmt(secs, 3)
              << " s" << std::endl;
    std::cout << "info: design,lag,adjusted,rho,sigma,omega0,omega1,total (mean RMSE)\n";
    std::vector<std::pair<std::string, std::optional<Iteration>>> cells = {
        {"prior", std::nullopt}, {"one-wave", std::nullopt}};
    for (auto l : kLags) cells.emplace_back("two-wave", l);
    for (const auto& [d, l] : cells) {
      for (bool adj : {false, true}) {
        if (d == "prior" && adj) continue;
        std::cout << "info: " << d << ',' << (l ? std::to_string(*l) : "NA") << ',' << adj;
        for (const char* p : {"rho", "sigma", "omega0", "omega1", "total"}) {
          std::cout << ',' << fmt(r.find(d, l, adj, p).mean);
        }
        std::cout << '\n';
      }
    }
    std::cout.flush();
    return r;
  }();
  return result;
}

Outcome posterior_concentration() {
  Checker c;
  const auto& r = desk_sweep();
  const double prior = r.find("prior", std::nullopt, false).mean;
  const double one = r.find("one-wave", std::nullopt, true).mean;
  const double two = r.find("two-wave", 50, true).mean;
  c.note("prior " + fmt(prior) + ", one-wave " + fmt(one) + " (" + fmt(100 * one / prior, 3) +
         "%), two-wave lag 50 " + fmt(two) + " (" + fmt(100 * two / prior, 3) + "%)");
  c.expect(one < 0.6 * prior, "one-wave not below 60% of prior");
  c.expect(two < 0.6 * prior, "two-wave lag 50 not below 60% of prior");
  return c.outcome();
}

Outcome two_wave_benefit() {
  Checker c;
  const auto& r = desk_sweep();
  const double one = r.find("one-wave", std::nullopt, true).mean;
  const double two = r.find("two-wave", 50, true).mean;
  c.note("lag 50 " + fmt(two) + " vs one-wave " + fmt(one));
  c.expect(two < one, "two-wave lag 50 not below one-wave");

  std::vector<double> x, y;
  for (auto l : kLags) {
    x.push_back(static_cast<double>(l));
    y.push_back(r.find("two-wave", l, true).mean);
  }
  const auto curve = loess_fit(x, y, 0.75);
  std::string trend;
  for (std::size_t i = 0; i < x.size(); ++i) {
    trend += (i ? " " : "") + fmt(x[i], 3) + ":" + fmt(curve.fit[i]) + "+-" + fmt(curve.se[i], 2);
  }
  c.note("loess " + trend);
  // Lags 0, 10, 25, 50 are the first four points.
  for (std::size_t i = 0; i + 1 < 4; ++i) {
    c.expect(curve.fit[i + 1] <= curve.fit[i] + curve.se[i + 1],
             "smoothed RMSE rises from lag " + fmt(x[i]) + " to " + fmt(x[i + 1]));
  }
  return c.outcome();
}

Outcome per_parameter_attribution() {
  Checker c;
  const auto& r = desk_sweep();
  // Both single-observation baselines: one wave, and two identical waves.
  for (const auto& [label, lag] : std::vector<std::pair<std::string, std::optional<Iteration>>>{
           {"one-wave", std::nullopt}, {"two-wave", 0}}) {
    std::map<std::string, double> reduction;
    std::string text;
    for (const char* p : {"rho", "sigma", "omega0", "omega1"}) {
      reduction[p] = r.find(label, lag, true, p).mean - r.find("two-wave", 50, true, p).mean;
      text += std::string(text.empty() ? "" : ", ") + p + " " + fmt(reduction[p]);
    }
    const std::string base = label + (lag ? " lag 0" : "");
    c.note("reduction " + base + " -> lag 50: " + text);
    const double informative = std::min(reduction["rho"], reduction["sigma"]);
    const double other = std::max(reduction["omega0"], reduction["omega1"]);
    c.expect(informative > other, "from " + base + ": rho/sigma not ahead of omega0/omega1");
  }
  return c.outcome();
}

Outcome adjustment_benefit() {
  Checker c;
  const auto& r = desk_sweep();
  double adj = 0.0, raw = 0.0;
  std::size_t cells = 0;
  for (const auto& a : r.aggregates) {
    if (a.design == "prior" || a.param != "total") continue;
    (a.adjusted ? adj : raw) += a.mean;
    cells += a.adjusted ? 1 : 0;
  }
  adj /= static_cast<double>(cells);
  raw /= static_cast<double>(cells);
  c.note("sweep mean adjusted " + fmt(adj) + " vs unadjusted " + fmt(raw) + " (" +
         fmt(100 * (raw - adj) / raw, 3) + "% lower)");
  c.expect(adj <= raw, "adjusted sweep mean above unadjusted");
  return c.outcome();
}

// 8 -------------------------------------------------------------------------

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::map<std::string, std::uint64_t> checksums(const fs::path& dir) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[e.path().filename().string()] = fnv1a(os.str());
  }
  return out;
}

Outcome cli_determinism() {
  Checker c;
  const fs::path root = fs::temp_directory_path() / "netabc_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream pts(root / "points.csv");
    pts << "x,y\n";
    for (int i = 0; i < 15; ++i) pts << i << ',' << std::sin(0.4 * i) + 0.1 * i << '\n';
  }
  const std::vector<std::vector<std::string>> commands = {
      {"simulate", "--n", "300", "--burn-in", "200", "--design", "two-wave", "--lag", "20"},
      {"summarize", "--n", "300", "--design", "two-wave", "--lag", "20"},
      {"reftable", "--n", "100", "--burn-in", "100", "--table-count", "400"},
      {"infer", "--n", "100", "--burn-in", "100", "--accept-fraction", "0.05"},
      {"lag-sweep", "--n", "60", "--burn-in", "50", "--lags", "0,5,20", "--truth-count", "6",
       "--table-count", "120", "--accepted", "15"},
      {"mapping", "--n", "100", "--burn-in", "100", "--mapping-param", "rho", "--grid",
       "0.1,0.5,0.9", "--runs-per-value", "8"},
      {"loess", "--loess-input", (root / "points.csv").string(), "--span", "0.6"},
  };
  std::size_t compared = 0;
  for (const auto& cmd : commands) {
    std::vector<std::map<std::string, std::uint64_t>> sums;
    for (const auto& [label, threads] :
         std::vector<std::pair<std::string, std::string>>{{"t1", "1"}, {"t8", "8"}, {"t8b", "8"}}) {
      const fs::path dir = root / label;
      std::vector<std::string> argv = {"netabc"};
      argv.insert(argv.end(), cmd.begin(), cmd.end());
      argv.insert(argv.end(), {"--seed", "4242", "--threads", threads, "--output-dir", dir.string()});
      std::ostringstream out, err;
      const int code = cli::run_command(argv, out, err);
      c.expect(code == 0, cmd[0] + " exited " + std::to_string(code) + ": " + err.str());
      // Only the files this command wrote: compare against a per-command copy.
      const fs::path snap = root / (label + "_" + cmd[0]);
      fs::create_directories(snap);
      for (const auto& e : fs::directory_iterator(dir)) {
        fs::copy_file(e.path(), snap / e.path().filename(), fs::copy_options::overwrite_existing);
      }
      sums.push_back(checksums(snap));
    }
    c.expect(sums[0] == sums[1], cmd[0] + ": 1 vs 8 threads differ");
    c.expect(sums[1] == sums[2], cmd[0] + ": re-run differs");
    compared += sums[0].size();
  }
  c.note(std::to_string(commands.size()) + " commands, " + std::to_string(compared) +
         " file checksums equal across 1/8 threads and re-runs");
  fs::remove_all(root);
  return c.outcome();
}

// 9 -------------------------------------------------------------------------

Outcome mapping_sanity() {
  Checker c;
  struct Probe {
    const char* param;
    std::size_t summary;  // 1-based
    int direction;        // -1 decreasing, +1 increasing
  };
  for (const Probe& pr : {Probe{"sigma", 2, -1}, Probe{"rho", 1, -1}, Probe{"omega1", 3, +1}}) {
    MappingConfig m;
    m.model = {1000, 0.0, 1000, 12};
    m.param = pr.param;
    m.runs_per_value = 100;
    m.master_seed = 99;
    const auto res = mapping_sweep(m);
    std::vector<double> x, med;
    for (const auto& row : res.rows) {
      if (row.summary != pr.summary) continue;
      x.push_back(row.value);
      med.push_back(row.median);
    }
    const auto sp = oracle::spearman(x, med);
    c.note(std::string(pr.param) + " vs median s" + std::to_string(pr.summary) + ": spearman " +
           fmt(sp.rho) + ", p " + fmt(sp.p_value, 3));
    c.expect(sp.rho * pr.direction > 0.0, std::string(pr.param) + " direction");
    c.expect(sp.p_value < 0.001, std::string(pr.param) + " not significant");
  }
  return c.outcome();
}

}  // namespace

int main() {
  std::cout << "netabc acceptance suite" << std::endl;
  criterion(1, "model laws", model_laws);
  criterion(2, "matching fairness", matching_fairness);
  criterion(3, "ABC mechanics", abc_mechanics);
  criterion(4, "posterior concentration vs prior", posterior_concentration);
  criterion(5, "two-wave benefit and lag trend", two_wave_benefit);
  criterion(6, "per-parameter attribution", per_parameter_attribution);
  criterion(7, "adjustment benefit", adjustment_benefit);
  criterion(8, "CLI determinism across thread counts", cli_determinism);
  criterion(9, "mapping-function directions", mapping_sanity);
  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
