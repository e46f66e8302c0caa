// Event log text format, one item per line, fields separated by single spaces:
//
//   netabc-eventlog 1
//   initial <iteration>
//   nodes <id> <id> ...
//   steady <u> <v> <start>             (edges present in the initial state)
//   casual <u> <v>
//   iter <t>                            (one block per recorded iteration)
//   willing <steady pool size> <casual pool size>
//   depart <id>
//   arrive <id>
//   dissolve <u> <v> <start> <end>
//   form <u> <v>
//   contact <u> <v> <u_partnered 0|1> <v_partnered 0|1>
//   end
//
// Within an iter block, lines appear in execution order of the step.

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "netabc/csv.hpp"
#include "netabc/netmodel.hpp"

namespace netabc {

namespace {

constexpr const char* kMagic = "netabc-eventlog 1";

NodeId parse_node(std::string_view s) {
  const auto v = parse_uint(s);
  if (v >= kNoNode) throw std::runtime_error("node id out of range: " + std::string(s));
  return static_cast<NodeId>(v);
}

bool parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw std::runtime_error("expected 0 or 1, got '" + std::string(s) + "'");
}

}  // namespace

void write_event_log(std::ostream& out, const EventLog& log) {
  out << kMagic << '\n';
  out << "initial " << log.initial.iteration << '\n';
  out << "nodes";
  for (NodeId id : log.initial.nodes) out << ' ' << id;
  out << '\n';
  for (const auto& e : log.initial.steady_edges) {
    out << "steady " << e.pair.u << ' ' << e.pair.v << ' ' << e.start << '\n';
  }
  for (const auto& c : log.initial.casual_edges) out << "casual " << c.u << ' ' << c.v << '\n';
  for (const auto& rec : log.records) {
    out << "iter " << rec.iteration << '\n';
    out << "willing " << rec.steady_willing << ' ' << rec.casual_willing << '\n';
    for (NodeId id : rec.departures) out << "depart " << id << '\n';
    for (NodeId id : rec.arrivals) out << "arrive " << id << '\n';
    for (const auto& d : rec.dissolutions) {
      out << "dissolve " << d.pair.u << ' ' << d.pair.v << ' ' << d.start << ' ' << d.end << '\n';
    }
    for (const auto& f : rec.steady_formations) out << "form " << f.u << ' ' << f.v << '\n';
    for (const auto& c : rec.casual_formations) {
      out << "contact " << c.pair.u << ' ' << c.pair.v << ' ' << (c.u_partnered ? 1 : 0) << ' '
          << (c.v_partnered ? 1 : 0) << '\n';
    }
  }
  out << "end\n";
}

EventLog read_event_log(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("event log line " + std::to_string(line_no) + ": " + what);
  };

  if (!next_line() || line != kMagic) throw fail("missing header '" + std::string(kMagic) + "'");

  EventLog log;
  IterationRecord* current = nullptr;
  bool seen_initial = false;
  bool seen_end = false;
  while (next_line()) {
    const auto f = split(line, ' ');
    const std::string_view tag = f[0];
    auto need = [&](std::size_t n) {
      if (f.size() != n) throw fail("'" + std::string(tag) + "' expects " +
                                    std::to_string(n - 1) + " fields");
    };
    try {
      if (tag == "initial") {
        need(2);
        log.initial.iteration = parse_int(f[1]);
        seen_initial = true;
      } else if (tag == "nodes") {
        for (std::size_t i = 1; i < f.size(); ++i) log.initial.nodes.push_back(parse_node(f[i]));
      } else if (tag == "steady" && !current) {
        need(4);
        log.initial.steady_edges.push_back(
            {make_pair(parse_node(f[1]), parse_node(f[2])), parse_int(f[3])});
      } else if (tag == "casual" && !current) {
        need(3);
        log.initial.casual_edges.push_back(make_pair(parse_node(f[1]), parse_node(f[2])));
      } else if (tag == "iter") {
        need(2);
        const Iteration t = parse_int(f[1]);
        const Iteration expected = log.initial.iteration + 1 +
                                   static_cast<Iteration>(log.records.size());
        if (t != expected) throw fail("expected iter " + std::to_string(expected));
        current = &log.records.emplace_back();
        current->iteration = t;
      } else if (tag == "end") {
        seen_end = true;
        break;
      } else if (!current) {
        throw fail("unexpected '" + std::string(tag) + "' before first iter");
      } else if (tag == "willing") {
        need(3);
        current->steady_willing = parse_uint(f[1]);
        current->casual_willing = parse_uint(f[2]);
      } else if (tag == "depart") {
        need(2);
        current->departures.push_back(parse_node(f[1]));
      } else if (tag == "arrive") {
        need(2);
        current->arrivals.push_back(parse_node(f[1]));
      } else if (tag == "dissolve") {
        need(5);
        current->dissolutions.push_back(
            {make_pair(parse_node(f[1]), parse_node(f[2])), parse_int(f[3]), parse_int(f[4])});
      } else if (tag == "form") {
        need(3);
        current->steady_formations.push_back(make_pair(parse_node(f[1]), parse_node(f[2])));
      } else if (tag == "contact") {
        need(5);
        current->casual_formations.push_back(
            {make_pair(parse_node(f[1]), parse_node(f[2])), parse_flag(f[3]), parse_flag(f[4])});
      } else {
        throw fail("unknown tag '" + std::string(tag) + "'");
      }
    } catch (const std::runtime_error& e) {
      if (std::string_view(e.what()).starts_with("event log line")) throw;
      throw fail(e.what());
    }
  }
  if (!seen_initial) throw std::runtime_error("event log: missing 'initial' line");
  if (!seen_end) throw std::runtime_error("event log: truncated (no 'end' line)");
  return log;
}

}  // namespace netabc
