#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace netabc {

// Purpose tags mixed into stream seeds so that the prior draw, the simulation
// and the ground-truth draws for one index never share a random stream.
enum class Stream : std::uint64_t {
  TablePrior = 1,
  TableSimulation = 2,
  TruthPrior = 3,
  TruthSimulation = 4,
  PriorBaseline = 5,
  MappingPrior = 6,
  MappingSimulation = 7,
};

std::uint64_t splitmix64(std::uint64_t& state);

// Counter-based seed split: a pure function of (master, stream, index), so a
// work item's randomness does not depend on which thread ran it or when.
std::uint64_t stream_seed(std::uint64_t master, Stream stream, std::uint64_t index);

/// Random source for one simulation or sampling task.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard.
/// Uniform, Bernoulli and bounded-integer draws are implemented here rather
/// than through <random> distributions so that streams are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netabc
