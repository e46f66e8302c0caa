#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netabc/netmodel.hpp"

namespace netabc {

inline constexpr Iteration kDefaultWindow = 12;
inline constexpr std::size_t kSummaryCount = 4;

/// Questionnaire-style statistics of one observation wave.
///
/// s1  fraction of present nodes without a steady partner at the wave end
/// s2  mean duration of steady partnerships that both started and were
///     dissolved inside the recall window (0 with s2_defined = false if none)
/// s3  among steady-partnered nodes at the wave end, fraction that also hold
///     a casual contact at the wave end
/// s4  steady episodes / (steady + casual episodes) over the window
struct SummaryVector {
  double s1 = 0.0;
  double s2 = 0.0;
  bool s2_defined = false;
  double s3 = 0.0;
  double s4 = 0.0;

  std::array<double, kSummaryCount> values() const { return {s1, s2, s3, s4}; }
  bool operator==(const SummaryVector&) const = default;
};

/// Observation design: a single wave, or two waves `lag` iterations apart.
struct Design {
  enum class Kind { OneWave, TwoWave };

  Kind kind = Kind::OneWave;
  Iteration lag = 0;

  static Design one_wave() { return {Kind::OneWave, 0}; }
  static Design two_wave(Iteration lag);

  std::size_t wave_count() const { return kind == Kind::OneWave ? 1 : 2; }
  std::size_t dimension() const { return kSummaryCount * wave_count(); }
  // Recorded iterations needed after burn-in for this design.
  Iteration record_span(Iteration window) const;
  // "one-wave" or "two-wave".
  std::string tag() const;

  bool operator==(const Design&) const = default;
};

// Parses the tag written by Design::tag(); lag is ignored for one-wave.
Design parse_design(std::string_view tag, Iteration lag);

struct DesignVector {
  Design design;
  std::vector<SummaryVector> waves;
  std::vector<double> values;  // wave-1 components, then wave-2 components
};

/// Statistics over the recall window (wave_end - window, wave_end].
/// Throws std::out_of_range unless the window lies inside the recorded span
/// and std::invalid_argument if window < 1.
///
/// Partnerships that straddle the window start count as steady episodes for
/// s4 but never toward s2. Undefined ratios (no present nodes, nobody
/// partnered, no episodes) evaluate to 1, 0 and 0 for s1, s3, s4.
SummaryVector wave_summaries(const EventLog& log, Iteration wave_end, Iteration window);

/// Wave 1 ends `window` iterations after the start of the recorded span; for
/// two-wave designs wave 2 ends `lag` iterations after wave 1.
DesignVector design_summaries(const EventLog& log, const Design& design,
                              Iteration window = kDefaultWindow);

// Headered CSV "design,lag,wave,s1,s2,s2_defined,s3,s4", one row per wave.
void write_summaries_csv(std::ostream& out, std::span<const DesignVector> vectors);

// Reads the first design found in a summaries CSV back into a DesignVector.
DesignVector read_summaries_csv(const std::string& path);

}  // namespace netabc
