#pragma once

// Exhaustive sweep over gate configurations with deterministic per-configuration
// seeding, checkpoint/resume, refinement of the high-fidelity tail and
// qubit-permutation closure.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qsynth/circuit.hpp"
#include "qsynth/grape.hpp"
#include "qsynth/store.hpp"
#include "qsynth/targets.hpp"

namespace qsynth {

struct SearchJob {
  TargetSpec target;
  int n = 3;
  int m = 2;
  int N = 1;
  EntanglerKind kind = EntanglerKind::cz;
  OptimizerSettings settings;
  int restarts = 1;
  /// Root seed; configuration `id` is optimised with child_seed(seed, id).
  std::uint64_t seed = 0;
  std::uint64_t instance_id = 0;
  std::filesystem::path output;
  std::uint64_t cap = kDefaultConfigCap;

  ConfigSpace space() const { return ConfigSpace(n, m, kind); }
};

std::string to_string(EntanglerKind kind);
EntanglerKind parse_entangler(const std::string& text);

/// Job <-> manifest JSON (the "job" object inside manifest.json).
std::string job_to_json(const SearchJob& job);
SearchJob job_from_json(const std::string& text);

/// Write <dir>/manifest.json for a fresh search.
void write_manifest(const SearchJob& job, const std::string& command);
/// Append a stage entry (refine / closure parameters) to an existing manifest.
void append_manifest_stage(const std::filesystem::path& dir, const std::string& stage_json);
SearchJob read_manifest(const std::filesystem::path& dir);

using ProgressFn = std::function<void(std::uint64_t done, std::uint64_t total)>;

struct RunOptions {
  int workers = 1;
  /// Configurations per block; each block is written in id order and then checkpointed.
  std::uint64_t block_size = 256;
  /// Stop after this many new configurations (simulates an interrupted run); 0 = no limit.
  std::uint64_t max_new = 0;
  ProgressFn progress;
  /// Recorded in the manifest when run_search creates it.
  std::string command = "search";
};

/// Optimise every configuration of the job not yet in the checkpoint.
/// Returns the number of configurations processed by this call.
std::uint64_t run_search(const SearchJob& job, ResultStore& store, const RunOptions& options = {});

/// Evaluate one configuration exactly as run_search would.
SearchRecord evaluate_config(const SearchJob& job, const Target& target, std::uint64_t config_id);

struct RefineOptions {
  double fidelity_floor = 0.999;
  OptimizerSettings settings = [] {
    OptimizerSettings s;
    s.max_iterations = 10'000;
    return s;
  }();
  int restarts = 5;
  /// Distinguishes repeated refinement passes (different seed streams).
  int pass = 0;
};

/// Re-optimise configurations with floor < F < 1 - stop_infidelity and append a
/// `refined` record wherever the fidelity improves. Returns the number improved.
std::uint64_t refine(const SearchJob& job, ResultStore& store, const RefineOptions& refine_options,
                     const RunOptions& options = {});

/// For each qubit-permutation orbit whose best fidelity is >= 1 - tol, assign that
/// fidelity to every member (appending `closure-assigned` records). Returns the number assigned.
std::uint64_t permutation_closure(const SearchJob& job, ResultStore& store, double tol);

/// Ids of the orbit of `config_id` under all qubit permutations (sorted, unique).
std::vector<std::uint64_t> permutation_orbit(const ConfigSpace& space, int N, std::uint64_t config_id);

struct SeriesPoint {
  int N = 0;
  /// Minimum over target instances of the per-instance maximum fidelity.
  double max_fidelity = 0.0;
  std::vector<double> per_instance;
  std::vector<std::uint64_t> best_config;
};

/// In-memory sweeps for N in [n_min, n_max]; one maximum per target instance.
std::vector<SeriesPoint> fidelity_vs_N(const std::vector<Target>& targets, const ConfigSpace& space,
                                       int n_min, int n_max, const OptimizerSettings& settings,
                                       int restarts, std::uint64_t seed, int workers = 1);

/// Optimise `count` distinct configurations drawn uniformly at random (all of
/// them if count >= space size). Records are returned sorted by id.
std::vector<SearchRecord> sample_search(const Target& target, const ConfigSpace& space, int N,
                                        std::uint64_t count, const OptimizerSettings& settings,
                                        int restarts, std::uint64_t seed, int workers = 1,
                                        double early_exit_infidelity = 0.0);

/// Run fn(i) for i in [0, count) on `workers` threads (dynamic assignment).
void parallel_for(std::uint64_t count, int workers, const std::function<void(std::uint64_t)>& fn);

}  // namespace qsynth
