#pragma once

// Append-only result store: one JSON record per line plus a binary checkpoint
// of completed configuration ids.
//
//   <dir>/records.jsonl   one SearchRecord per line, replayed merge-by-max
//   <dir>/checkpoint.bin  "QSYNCKPT", u32 version, u32 reserved, u64 total,
//                         u64 completed, ceil(total/8) bytes of bitset (LSB first)
//   <dir>/manifest.json   run parameters (see search.hpp)

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qsynth {

enum class Stage { initial, refined, closure };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& text);

struct SearchRecord {
  std::uint64_t config_id = 0;
  std::string config;
  double fidelity = 0.0;
  int iterations = 0;
  int restarts = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  Stage stage = Stage::initial;

  /// Equality of everything except wall_time (the only scheduling-dependent field).
  bool same_result(const SearchRecord& other) const;
};

std::string to_json_line(const SearchRecord& record);
SearchRecord parse_json_line(const std::string& line);

/// Lossless decimal form of a double (17 significant digits).
std::string format_double(double value);

inline constexpr char kCheckpointMagic[8] = {'Q', 'S', 'Y', 'N', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class ResultStore {
 public:
  /// Open (creating if needed) the store at `dir` and replay any existing records.
  explicit ResultStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path records_path() const { return dir_ / "records.jsonl"; }
  std::filesystem::path checkpoint_path() const { return dir_ / "checkpoint.bin"; }
  std::filesystem::path manifest_path() const { return dir_ / "manifest.json"; }

  /// Append records to the log (flushed before returning) and merge them into the best view.
  void append(std::span<const SearchRecord> records);

  /// Best record per config id (highest fidelity; earliest wins ties).
  const std::map<std::uint64_t, SearchRecord>& best() const { return best_; }
  std::vector<SearchRecord> best_records() const;
  /// Number of raw lines replayed or appended.
  std::size_t log_size() const { return log_size_; }

  std::uint64_t checkpoint_total() const { return total_; }
  bool completed(std::uint64_t id) const;
  std::uint64_t completed_count() const { return completed_count_; }
  /// Size the checkpoint bitset for a new job (no-op if it already matches).
  void init_checkpoint(std::uint64_t total);
  void mark_completed(std::span<const std::uint64_t> ids);
  /// Atomically rewrite checkpoint.bin.
  void save_checkpoint() const;

  /// Remove records, checkpoint and manifest.
  void clear();

 private:
  void merge(const SearchRecord& record);
  void load_checkpoint();

  std::filesystem::path dir_;
  std::map<std::uint64_t, SearchRecord> best_;
  std::size_t log_size_ = 0;
  std::uint64_t total_ = 0;
  std::uint64_t completed_count_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace qsynth
