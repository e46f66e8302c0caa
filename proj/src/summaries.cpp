#include "netabc/summaries.hpp"

#include <map>
#include <ostream>
#include <stdexcept>

#include "netabc/csv.hpp"

namespace netabc {

Design Design::two_wave(Iteration lag) {
  if (lag < 0) throw std::invalid_argument("two-wave lag must be non-negative");
  return {Kind::TwoWave, lag};
}

Iteration Design::record_span(Iteration window) const {
  return kind == Kind::OneWave ? window : window + lag;
}

std::string Design::tag() const { return kind == Kind::OneWave ? "one-wave" : "two-wave"; }

Design parse_design(std::string_view tag, Iteration lag) {
  if (tag == "one-wave") return Design::one_wave();
  if (tag == "two-wave") return Design::two_wave(lag);
  throw std::invalid_argument("unknown design '" + std::string(tag) +
                              "' (expected one-wave or two-wave)");
}

SummaryVector wave_summaries(const EventLog& log, Iteration wave_end, Iteration window) {
  if (window < 1) throw std::invalid_argument("recall window must be at least 1 iteration");
  const Iteration window_start = wave_end - window + 1;
  if (window_start - 1 < log.initial.iteration || wave_end > log.last_iteration()) {
    throw std::out_of_range("recall window (" + std::to_string(wave_end - window) + ", " +
                            std::to_string(wave_end) + "] outside recorded span (" +
                            std::to_string(log.initial.iteration) + ", " +
                            std::to_string(log.last_iteration()) + "]");
  }

  auto nodes = static_cast<std::int64_t>(log.initial.nodes.size());
  auto steady = static_cast<std::int64_t>(log.initial.steady_edges.size());
  std::int64_t steady_episodes = 0;
  std::int64_t casual_episodes = 0;
  std::int64_t completed = 0;
  std::int64_t completed_length = 0;

  for (Iteration t = log.first_iteration(); t <= wave_end; ++t) {
    const auto& rec = log.at(t);
    nodes += static_cast<std::int64_t>(rec.arrivals.size()) -
             static_cast<std::int64_t>(rec.departures.size());
    steady += static_cast<std::int64_t>(rec.steady_formations.size()) -
              static_cast<std::int64_t>(rec.dissolutions.size());
    if (t < window_start) continue;
    if (t == window_start) {
      steady_episodes += steady;  // everything present at the first window iteration
    } else {
      steady_episodes += static_cast<std::int64_t>(rec.steady_formations.size());
    }
    casual_episodes += static_cast<std::int64_t>(rec.casual_formations.size());
    for (const auto& d : rec.dissolutions) {
      if (d.start >= window_start) {
        ++completed;
        completed_length += d.end - d.start + 1;
      }
    }
  }

  std::int64_t partnered_with_casual = 0;
  for (const auto& c : log.at(wave_end).casual_formations) {
    partnered_with_casual += (c.u_partnered ? 1 : 0) + (c.v_partnered ? 1 : 0);
  }

  SummaryVector s;
  s.s1 = nodes > 0 ? static_cast<double>(nodes - 2 * steady) / static_cast<double>(nodes) : 1.0;
  s.s2_defined = completed > 0;
  s.s2 = s.s2_defined ? static_cast<double>(completed_length) / static_cast<double>(completed)
                      : 0.0;
  s.s3 = steady > 0 ? static_cast<double>(partnered_with_casual) / static_cast<double>(2 * steady)
                    : 0.0;
  const auto episodes = steady_episodes + casual_episodes;
  s.s4 = episodes > 0 ? static_cast<double>(steady_episodes) / static_cast<double>(episodes) : 0.0;
  return s;
}

DesignVector design_summaries(const EventLog& log, const Design& design, Iteration window) {
  const Iteration first_end = log.initial.iteration + window;
  const Iteration needed = log.initial.iteration + design.record_span(window);
  if (needed > log.last_iteration()) {
    throw std::out_of_range(design.tag() + " design with lag " + std::to_string(design.lag) +
                            " needs " + std::to_string(design.record_span(window)) +
                            " recorded iterations, log has " +
                            std::to_string(log.records.size()));
  }
  DesignVector out;
  out.design = design;
  out.waves.push_back(wave_summaries(log, first_end, window));
  if (design.kind == Design::Kind::TwoWave) {
    out.waves.push_back(wave_summaries(log, first_end + design.lag, window));
  }
  out.values.reserve(design.dimension());
  for (const auto& w : out.waves) {
    for (double v : w.values()) out.values.push_back(v);
  }
  return out;
}

void write_summaries_csv(std::ostream& out, std::span<const DesignVector> vectors) {
  out << "design,lag,wave,s1,s2,s2_defined,s3,s4\n";
  for (const auto& dv : vectors) {
    const std::string lag =
        dv.design.kind == Design::Kind::TwoWave ? std::to_string(dv.design.lag) : "NA";
    for (std::size_t w = 0; w < dv.waves.size(); ++w) {
      const auto& s = dv.waves[w];
      out << dv.design.tag() << ',' << lag << ',' << (w + 1) << ',' << format_double(s.s1) << ','
          << format_double(s.s2) << ',' << (s.s2_defined ? 1 : 0) << ',' << format_double(s.s3)
          << ',' << format_double(s.s4) << '\n';
    }
  }
}

DesignVector read_summaries_csv(const std::string& path) {
  const auto csv = read_csv(path);
  if (csv.rows.empty()) throw std::runtime_error(path + ": no summary rows");
  const auto c_design = csv.column("design");
  const auto c_lag = csv.column("lag");
  const auto c_wave = csv.column("wave");
  const std::array<std::size_t, 5> cols = {csv.column("s1"), csv.column("s2"),
                                           csv.column("s2_defined"), csv.column("s3"),
                                           csv.column("s4")};

  const auto& first = csv.rows.front();
  const Iteration lag = first[c_lag] == "NA" ? 0 : parse_int(first[c_lag]);
  DesignVector dv;
  dv.design = parse_design(first[c_design], lag);

  std::map<std::int64_t, SummaryVector> waves;
  for (const auto& row : csv.rows) {
    if (row[c_design] != first[c_design] || row[c_lag] != first[c_lag]) continue;
    SummaryVector s;
    s.s1 = parse_double(row[cols[0]]);
    s.s2 = parse_double(row[cols[1]]);
    s.s2_defined = parse_int(row[cols[2]]) != 0;
    s.s3 = parse_double(row[cols[3]]);
    s.s4 = parse_double(row[cols[4]]);
    waves[parse_int(row[c_wave])] = s;
  }
  for (std::size_t w = 1; w <= dv.design.wave_count(); ++w) {
    const auto it = waves.find(static_cast<std::int64_t>(w));
    if (it == waves.end()) throw std::runtime_error(path + ": missing wave " + std::to_string(w));
    dv.waves.push_back(it->second);
    for (double v : it->second.values()) dv.values.push_back(v);
  }
  return dv;
}

}  // namespace netabc
