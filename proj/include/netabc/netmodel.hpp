#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "netabc/rng.hpp"

namespace netabc {

using NodeId = std::uint32_t;
using Iteration = std::int64_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Generative parameters of the partnership model. All probabilities are per
/// iteration (one iteration is read as one calendar month).
struct ParamSet {
  double rho = 0.0;     // single -> willing to form a steady partnership
  double sigma = 0.0;   // steady partnership dissolves
  double omega0 = 0.0;  // single -> willing to form a casual contact
  double omega1 = 0.0;  // steady-partnered -> willing to form a casual contact
  double mu = 0.0;      // individual leaves the population
  std::int64_t n = 1000;

  // Throws std::invalid_argument unless every probability is in [0, 1] and n >= 2.
  void validate() const;

  bool operator==(const ParamSet&) const = default;
};

// Unordered node pair, stored with u < v.
struct Pair {
  NodeId u = kNoNode;
  NodeId v = kNoNode;

  auto operator<=>(const Pair&) const = default;
};

Pair make_pair(NodeId a, NodeId b);

struct SteadyEdge {
  Pair pair;
  Iteration start = 0;  // iteration at which the partnership formed

  auto operator<=>(const SteadyEdge&) const = default;
};

// Canonical (sorted) view of the network at the end of one iteration.
struct StateSnapshot {
  Iteration iteration = 0;
  std::vector<NodeId> nodes;
  std::vector<SteadyEdge> steady_edges;
  std::vector<Pair> casual_edges;

  bool operator==(const StateSnapshot&) const = default;
};

// A steady partnership occupied the iterations [start, end]. It is recorded
// in the log of iteration end + 1, the step during which it was dissolved.
struct SteadyDissolution {
  Pair pair;
  Iteration start = 0;
  Iteration end = 0;

  bool operator==(const SteadyDissolution&) const = default;
};

struct CasualFormation {
  Pair pair;
  bool u_partnered = false;  // u held a steady partner when the contact formed
  bool v_partnered = false;

  bool operator==(const CasualFormation&) const = default;
};

/// Everything that happened during one step, in execution order: departures
/// (and the dissolutions they cause), arrivals, sigma-dissolutions, steady
/// formations (stamped with this iteration), then casual formations.
struct IterationRecord {
  Iteration iteration = 0;
  std::size_t steady_willing = 0;  // size of the steady matching pool
  std::size_t casual_willing = 0;  // size of the casual matching pool
  std::vector<NodeId> departures;
  std::vector<NodeId> arrivals;
  std::vector<SteadyDissolution> dissolutions;
  std::vector<Pair> steady_formations;
  std::vector<CasualFormation> casual_formations;

  bool operator==(const IterationRecord&) const = default;
};

/// Recorded portion of a trajectory: the state at the start of the recorded
/// span plus one record per recorded iteration. Replaying the records from
/// `initial` reproduces every later snapshot.
struct EventLog {
  StateSnapshot initial;
  std::vector<IterationRecord> records;

  Iteration first_iteration() const { return initial.iteration + 1; }
  Iteration last_iteration() const {
    return initial.iteration + static_cast<Iteration>(records.size());
  }
  // Record of iteration t; t must lie in [first_iteration(), last_iteration()].
  const IterationRecord& at(Iteration t) const;

  bool operator==(const EventLog&) const = default;
};

/// Mutable network state for one trajectory.
///
/// Node ids are assigned in increasing order and never reused. Each node has
/// at most one steady and at most one casual partner; casual edges exist only
/// for the iteration in which they formed.
class NetworkState {
 public:
  explicit NetworkState(std::int64_t n);

  Iteration iteration() const { return iteration_; }
  double arrival_accumulator() const { return arrival_accumulator_; }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<SteadyEdge>& steady_edges() const { return steady_; }
  const std::vector<Pair>& casual_edges() const { return casual_; }
  NodeId next_id() const { return static_cast<NodeId>(alive_.size()); }

  bool alive(NodeId id) const { return id < alive_.size() && alive_[id]; }
  NodeId steady_partner(NodeId id) const { return partner_[id]; }

  StateSnapshot snapshot() const;

  // Throws std::logic_error describing the first violated invariant.
  void check_invariants() const;

 private:
  friend IterationRecord step(NetworkState&, const ParamSet&, Rng&);

  NodeId add_node();

  std::vector<NodeId> nodes_;
  std::vector<SteadyEdge> steady_;
  std::vector<Pair> casual_;
  std::vector<NodeId> partner_;  // indexed by id; kNoNode when single
  std::vector<char> alive_;      // indexed by id
  Iteration iteration_ = 0;
  double arrival_accumulator_ = 0.0;

  // Scratch buffers reused across steps.
  std::vector<NodeId> willing_;
  std::vector<char> departing_;
};

// Empty graph on n nodes (ids 0..n-1). Throws std::invalid_argument if n < 2.
NetworkState init_state(std::int64_t n);

/// Uniform random maximum matching of the willing nodes: the list is shuffled
/// and consecutive entries paired, so with an odd count the one left out is
/// uniform over the input.
std::vector<Pair> match_pairs(std::span<NodeId> willing, Rng& rng);

/// Advances the state by one iteration:
///  1. clear last iteration's casual edges;
///  2. migration: each node departs with probability mu (its steady edge is
///     dissolved), then floor(acc + n*mu) new single nodes arrive;
///  3. each steady edge dissolves with probability sigma;
///  4. each single node is steady-willing with probability rho; willing nodes
///     are matched into steady edges stamped with the new iteration;
///  5. each single node is casual-willing with probability omega0, each
///     partnered node with omega1; the joint pool is matched into casual edges.
/// Willingness draws visit nodes in ascending id order.
IterationRecord step(NetworkState& state, const ParamSet& params, Rng& rng);

struct SimulationResult {
  EventLog log;
  NetworkState final_state;
};

/// Runs burn_in unrecorded steps from the empty graph, then record_span
/// recorded steps. Steady start stamps from the burn-in are kept.
SimulationResult simulate(const ParamSet& params, Iteration burn_in, Iteration record_span,
                          std::uint64_t seed);

// Replays the log up to iteration t, in [initial.iteration, last_iteration()].
StateSnapshot replay(const EventLog& log, Iteration t);

enum class EdgeType { Steady, Casual };

struct EdgeRecord {
  Iteration iteration = 0;
  NodeId u = 0;
  NodeId v = 0;
  EdgeType type = EdgeType::Steady;

  auto operator<=>(const EdgeRecord&) const = default;
};

/// Edges formed during iterations [from, to], sorted by (iteration, type,
/// u, v) with steady before casual. Throws std::out_of_range if the range is
/// not inside the recorded span.
std::vector<EdgeRecord> export_edges(const EventLog& log, Iteration from, Iteration to);

// Headered CSV "iteration,node_u,node_v,type".
void write_edges_csv(std::ostream& out, std::span<const EdgeRecord> rows);

// Line-oriented text serialization of an EventLog (format documented in
// event_log_io.cpp). read_event_log throws std::runtime_error on bad input.
void write_event_log(std::ostream& out, const EventLog& log);
EventLog read_event_log(std::istream& in);

}  // namespace netabc
