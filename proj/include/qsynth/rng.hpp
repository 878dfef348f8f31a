#pragma once

#include <cstdint>
#include <random>

namespace qsynth {

/// Derive an independent child seed; stable across platforms and worker layouts.
std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index);

/// Seeded generator with platform-independent real/integer draws
/// (std::*_distribution output is implementation-defined, so it is avoided).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qsynth
