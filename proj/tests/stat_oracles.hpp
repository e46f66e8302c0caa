// Statistical helpers and independent oracles shared by the test binaries.
// Nothing here calls into the code path it is used to check.
#pragma once

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "netabc/netmodel.hpp"
#include "netabc/summaries.hpp"

namespace oracle {

// Kolmogorov limiting distribution, P(K > lambda).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

inline KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

inline double chi_square_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

struct SpearmanResult {
  double rho;
  double p_value;  // two-sided, t approximation
};

inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  const double rho = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
  if (std::abs(rho) >= 1.0) return {rho, 0.0};
  const double t = rho * std::sqrt((n - 2.0) / (1.0 - rho * rho));
  const boost::math::students_t dist(n - 2.0);
  return {rho, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))};
}

// Wave statistics counted from replayed snapshots of every iteration in the
// window, rather than from event counts.
inline netabc::SummaryVector summaries_by_replay(const netabc::EventLog& log,
                                                 netabc::Iteration wave_end,
                                                 netabc::Iteration window) {
  using namespace netabc;
  const Iteration first = wave_end - window + 1;
  std::vector<StateSnapshot> snaps;
  for (Iteration t = first; t <= wave_end; ++t) snaps.push_back(replay(log, t));
  const auto& last = snaps.back();

  std::set<NodeId> partnered;
  for (const auto& e : last.steady_edges) {
    partnered.insert(e.pair.u);
    partnered.insert(e.pair.v);
  }
  std::set<NodeId> in_casual;
  for (const auto& c : last.casual_edges) {
    in_casual.insert(c.u);
    in_casual.insert(c.v);
  }
  std::size_t both = 0;
  for (NodeId id : partnered) both += in_casual.count(id);

  // (pair, start) -> last iteration seen in the window
  std::map<std::pair<Pair, Iteration>, Iteration> seen;
  std::size_t casual_episodes = 0;
  for (const auto& s : snaps) {
    for (const auto& e : s.steady_edges) seen[{e.pair, e.start}] = s.iteration;
    casual_episodes += s.casual_edges.size();
  }
  double length = 0.0;
  std::size_t completed = 0;
  for (const auto& [key, last_seen] : seen) {
    if (key.second >= first && last_seen < wave_end) {
      ++completed;
      length += static_cast<double>(last_seen - key.second + 1);
    }
  }

  SummaryVector out;
  const double nodes = static_cast<double>(last.nodes.size());
  out.s1 = nodes > 0 ? static_cast<double>(last.nodes.size() - partnered.size()) / nodes : 1.0;
  out.s2_defined = completed > 0;
  out.s2 = completed > 0 ? length / static_cast<double>(completed) : 0.0;
  out.s3 = partnered.empty() ? 0.0
                             : static_cast<double>(both) / static_cast<double>(partnered.size());
  const double episodes = static_cast<double>(seen.size() + casual_episodes);
  out.s4 = episodes > 0 ? static_cast<double>(seen.size()) / episodes : 0.0;
  return out;
}

}  // namespace oracle
