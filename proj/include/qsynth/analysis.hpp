#pragma once

// Statistics over result stores: fidelity histograms, perfect sets, depth
// distributions, qubit-pair usage and permutation / time-reversal orbits.
// No result depends on record order.

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsynth/bounds.hpp"
#include "qsynth/circuit.hpp"
#include "qsynth/search.hpp"
#include "qsynth/store.hpp"

namespace qsynth {

enum class Binning { linear, log_infidelity };

struct Histogram {
  Binning binning = Binning::log_infidelity;
  /// Strictly increasing; counts.size() == edges.size() - 1. Bins are [lo, hi).
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t total() const;
};

inline constexpr double kClampInfidelity = 1e-12;

/// Log binning: one decade per bin over 1-F in [1e-12, 1]; 1-F below 1e-12
/// lands in the first bin and 1-F >= 1 in the last.
/// Linear binning: `bins` equal bins over F in [0, 1], values outside clamped to the ends.
Histogram histogram(std::span<const SearchRecord> records, Binning binning, int bins = 12);

struct PerfectSet {
  double tol = 1e-12;
  std::vector<SearchRecord> members;  // sorted by config_id
  std::uint64_t total = 0;
  std::size_t count() const { return members.size(); }
  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(members.size()) / total; }
};

/// Records with F >= 1 - tol; `total` is the population size for fraction().
PerfectSet perfect_set(std::span<const SearchRecord> records, double tol = 1e-12, std::uint64_t total = 0);

std::size_t count_infidelity_below(std::span<const SearchRecord> records, double threshold);

std::map<int, std::uint64_t> depth_distribution(const PerfectSet& ps, int n);

/// Gate count per qubit pair; every pair of the n qubits appears, unused ones with 0.
std::map<std::pair<int, int>, int> pair_usage(const GateConfiguration& config);

struct OrbitReport {
  /// Orbits under qubit permutation, each sorted; ordered by smallest member.
  std::vector<std::vector<std::uint64_t>> permutation_orbits;
  /// Unions of permutation orbits related by time reversal (equal to
  /// permutation_orbits when reversal is not applied).
  std::vector<std::vector<std::uint64_t>> merged_classes;
  bool reversal_applied = false;
};

/// Orbits of the perfect set. Reversal merging only when `target_self_inverse`.
OrbitReport orbit_report(const PerfectSet& ps, const ConfigSpace& space, int N, bool target_self_inverse);

void write_histogram_csv(std::ostream& out, const Histogram& h);
void write_depth_csv(std::ostream& out, const std::map<int, std::uint64_t>& depths);
void write_orbit_csv(std::ostream& out, const OrbitReport& report, const ConfigSpace& space, int N);
/// One row per member: gate count on every pair, then the unused pairs.
void write_pairs_csv(std::ostream& out, const PerfectSet& ps, int n);
void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series);
void write_bounds_csv(std::ostream& out, Task task, int n, const std::vector<int>& ms, int n_max);

}  // namespace qsynth
