#include "netabc/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace netabc {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be a probability in [0, 1], got " +
                                std::to_string(p));
  }
}

}  // namespace

void ParamSet::validate() const {
  check_probability(rho, "rho");
  check_probability(sigma, "sigma");
  check_probability(omega0, "omega0");
  check_probability(omega1, "omega1");
  check_probability(mu, "mu");
  if (n < 2) throw std::invalid_argument("n must be at least 2, got " + std::to_string(n));
}

Pair make_pair(NodeId a, NodeId b) { return a < b ? Pair{a, b} : Pair{b, a}; }

const IterationRecord& EventLog::at(Iteration t) const {
  if (t < first_iteration() || t > last_iteration()) {
    throw std::out_of_range("iteration " + std::to_string(t) + " outside recorded span [" +
                            std::to_string(first_iteration()) + ", " +
                            std::to_string(last_iteration()) + "]");
  }
  return records[static_cast<std::size_t>(t - first_iteration())];
}

NetworkState::NetworkState(std::int64_t n) {
  if (n < 2) throw std::invalid_argument("n must be at least 2, got " + std::to_string(n));
  const auto count = static_cast<std::size_t>(n);
  nodes_.reserve(count);
  partner_.reserve(count);
  alive_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) add_node();
}

NodeId NetworkState::add_node() {
  const auto id = static_cast<NodeId>(alive_.size());
  if (id == kNoNode) throw std::overflow_error("node id space exhausted");
  alive_.push_back(1);
  partner_.push_back(kNoNode);
  nodes_.push_back(id);
  return id;
}

StateSnapshot NetworkState::snapshot() const {
  StateSnapshot snap;
  snap.iteration = iteration_;
  snap.nodes = nodes_;
  snap.steady_edges = steady_;
  std::sort(snap.steady_edges.begin(), snap.steady_edges.end());
  snap.casual_edges = casual_;
  std::sort(snap.casual_edges.begin(), snap.casual_edges.end());
  return snap;
}

void NetworkState::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("invariant: " + what); };
  if (!std::is_sorted(nodes_.begin(), nodes_.end()) ||
      std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end()) {
    fail("node list not strictly increasing");
  }
  std::size_t alive_count = 0;
  for (char a : alive_) alive_count += a ? 1 : 0;
  if (alive_count != nodes_.size()) fail("alive flags disagree with node list");

  std::size_t partnered = 0;
  for (NodeId id : nodes_) {
    const NodeId p = partner_[id];
    if (p == kNoNode) continue;
    ++partnered;
    if (!alive(p)) fail("steady partner of " + std::to_string(id) + " is not present");
    if (partner_[p] != id) fail("steady partnership not symmetric at " + std::to_string(id));
  }
  if (partnered != 2 * steady_.size()) fail("steady edge count disagrees with partner index");
  for (const auto& e : steady_) {
    if (e.pair.u >= e.pair.v) fail("steady pair not ordered");
    if (partner_[e.pair.u] != e.pair.v) fail("steady edge missing from partner index");
    if (e.start > iteration_) fail("steady edge starts in the future");
  }

  std::vector<char> casual_degree(alive_.size(), 0);
  for (const auto& c : casual_) {
    if (c.u >= c.v) fail("casual pair not ordered");
    if (!alive(c.u) || !alive(c.v)) fail("casual endpoint not present");
    if (casual_degree[c.u]++ || casual_degree[c.v]++) fail("casual degree exceeds one");
  }
}

NetworkState init_state(std::int64_t n) { return NetworkState(n); }

std::vector<Pair> match_pairs(std::span<NodeId> willing, Rng& rng) {
  rng.shuffle(willing);
  std::vector<Pair> pairs;
  pairs.reserve(willing.size() / 2);
  for (std::size_t i = 0; i + 1 < willing.size(); i += 2) {
    pairs.push_back(make_pair(willing[i], willing[i + 1]));
  }
  return pairs;
}

IterationRecord step(NetworkState& s, const ParamSet& p, Rng& rng) {
  IterationRecord rec;
  const Iteration t = s.iteration_ + 1;
  rec.iteration = t;

  s.casual_.clear();

  if (p.mu > 0.0) {
    s.departing_.assign(s.alive_.size(), 0);
    for (NodeId id : s.nodes_) {
      if (rng.bernoulli(p.mu)) {
        s.departing_[id] = 1;
        rec.departures.push_back(id);
      }
    }
    if (!rec.departures.empty()) {
      std::erase_if(s.steady_, [&](const SteadyEdge& e) {
        if (!s.departing_[e.pair.u] && !s.departing_[e.pair.v]) return false;
        s.partner_[e.pair.u] = kNoNode;
        s.partner_[e.pair.v] = kNoNode;
        rec.dissolutions.push_back({e.pair, e.start, t - 1});
        return true;
      });
      for (NodeId id : rec.departures) s.alive_[id] = 0;
      std::erase_if(s.nodes_, [&](NodeId id) { return s.departing_[id] != 0; });
    }
    s.arrival_accumulator_ += static_cast<double>(p.n) * p.mu;
    const double whole = std::floor(s.arrival_accumulator_);
    s.arrival_accumulator_ -= whole;
    for (auto k = static_cast<std::int64_t>(whole); k > 0; --k) {
      rec.arrivals.push_back(s.add_node());
    }
  }

  if (p.sigma > 0.0) {
    // Explicit loop: the draw order must follow storage order.
    std::size_t kept = 0;
    for (std::size_t i = 0; i < s.steady_.size(); ++i) {
      const SteadyEdge e = s.steady_[i];
      if (rng.bernoulli(p.sigma)) {
        s.partner_[e.pair.u] = kNoNode;
        s.partner_[e.pair.v] = kNoNode;
        rec.dissolutions.push_back({e.pair, e.start, t - 1});
      } else {
        s.steady_[kept++] = e;
      }
    }
    s.steady_.resize(kept);
  }

  if (p.rho > 0.0) {
    s.willing_.clear();
    for (NodeId id : s.nodes_) {
      if (s.partner_[id] == kNoNode && rng.bernoulli(p.rho)) s.willing_.push_back(id);
    }
    rec.steady_willing = s.willing_.size();
    for (const Pair& pr : match_pairs(s.willing_, rng)) {
      s.partner_[pr.u] = pr.v;
      s.partner_[pr.v] = pr.u;
      s.steady_.push_back({pr, t});
      rec.steady_formations.push_back(pr);
    }
  }

  if (p.omega0 > 0.0 || p.omega1 > 0.0) {
    s.willing_.clear();
    for (NodeId id : s.nodes_) {
      const double q = s.partner_[id] == kNoNode ? p.omega0 : p.omega1;
      if (rng.bernoulli(q)) s.willing_.push_back(id);
    }
    rec.casual_willing = s.willing_.size();
    for (const Pair& pr : match_pairs(s.willing_, rng)) {
      s.casual_.push_back(pr);
      rec.casual_formations.push_back(
          {pr, s.partner_[pr.u] != kNoNode, s.partner_[pr.v] != kNoNode});
    }
  }

  s.iteration_ = t;
  return rec;
}

SimulationResult simulate(const ParamSet& params, Iteration burn_in, Iteration record_span,
                          std::uint64_t seed) {
  params.validate();
  if (burn_in < 0) throw std::invalid_argument("burn_in must be non-negative");
  if (record_span < 1) throw std::invalid_argument("record_span must be at least 1");

  NetworkState state = init_state(params.n);
  Rng rng(seed);
  for (Iteration i = 0; i < burn_in; ++i) step(state, params, rng);

  EventLog log;
  log.initial = state.snapshot();
  log.records.reserve(static_cast<std::size_t>(record_span));
  for (Iteration i = 0; i < record_span; ++i) log.records.push_back(step(state, params, rng));
  return {std::move(log), std::move(state)};
}

StateSnapshot replay(const EventLog& log, Iteration t) {
  if (t < log.initial.iteration || t > log.last_iteration()) {
    throw std::out_of_range("replay target " + std::to_string(t) + " outside recorded span");
  }
  std::set<NodeId> nodes(log.initial.nodes.begin(), log.initial.nodes.end());
  std::map<Pair, Iteration> steady;
  for (const auto& e : log.initial.steady_edges) steady.emplace(e.pair, e.start);
  std::vector<Pair> casual = log.initial.casual_edges;

  for (Iteration it = log.first_iteration(); it <= t; ++it) {
    const auto& rec = log.at(it);
    for (NodeId id : rec.departures) nodes.erase(id);
    nodes.insert(rec.arrivals.begin(), rec.arrivals.end());
    for (const auto& d : rec.dissolutions) steady.erase(d.pair);
    for (const auto& f : rec.steady_formations) steady.emplace(f, it);
    casual.clear();
    for (const auto& c : rec.casual_formations) casual.push_back(c.pair);
  }

  StateSnapshot snap;
  snap.iteration = t;
  snap.nodes.assign(nodes.begin(), nodes.end());
  for (const auto& [pair, start] : steady) snap.steady_edges.push_back({pair, start});
  std::sort(casual.begin(), casual.end());
  snap.casual_edges = std::move(casual);
  return snap;
}

std::vector<EdgeRecord> export_edges(const EventLog& log, Iteration from, Iteration to) {
  if (from > to) throw std::out_of_range("export range is empty (from > to)");
  if (from < log.first_iteration() || to > log.last_iteration()) {
    throw std::out_of_range("export range [" + std::to_string(from) + ", " + std::to_string(to) +
                            "] outside recorded span [" + std::to_string(log.first_iteration()) +
                            ", " + std::to_string(log.last_iteration()) + "]");
  }
  std::vector<EdgeRecord> rows;
  for (Iteration t = from; t <= to; ++t) {
    const auto& rec = log.at(t);
    for (const auto& f : rec.steady_formations) rows.push_back({t, f.u, f.v, EdgeType::Steady});
    for (const auto& c : rec.casual_formations) {
      rows.push_back({t, c.pair.u, c.pair.v, EdgeType::Casual});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
    if (a.iteration != b.iteration) return a.iteration < b.iteration;
    if (a.type != b.type) return a.type == EdgeType::Steady;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  return rows;
}

void write_edges_csv(std::ostream& out, std::span<const EdgeRecord> rows) {
  out << "iteration,node_u,node_v,type\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << r.u << ',' << r.v << ','
        << (r.type == EdgeType::Steady ? "steady" : "casual") << '\n';
  }
}

}  // namespace netabc
