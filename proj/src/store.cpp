#include "qsynth/store.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "json.hpp"

namespace qsynth {

namespace fs = std::filesystem;

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::initial:
      return "initial";
    case Stage::refined:
      return "refined";
    case Stage::closure:
      return "closure-assigned";
  }
  return "initial";
}

Stage parse_stage(const std::string& text) {
  if (text == "initial") return Stage::initial;
  if (text == "refined") return Stage::refined;
  if (text == "closure-assigned") return Stage::closure;
  throw std::invalid_argument("unknown stage '" + text + "'");
}

bool SearchRecord::same_result(const SearchRecord& o) const {
  return config_id == o.config_id && config == o.config && fidelity == o.fidelity &&
         iterations == o.iterations && restarts == o.restarts && seed == o.seed && stage == o.stage;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return buf.data();
}

std::string to_json_line(const SearchRecord& r) {
  nlohmann::ordered_json j;
  j["config_id"] = r.config_id;
  j["config"] = r.config;
  j["fidelity"] = format_double(r.fidelity);
  j["iterations"] = r.iterations;
  j["restarts"] = r.restarts;
  j["seed"] = r.seed;
  j["wall_time"] = format_double(r.wall_time);
  j["stage"] = to_string(r.stage);
  return j.dump();
}

SearchRecord parse_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  SearchRecord r;
  r.config_id = j.at("config_id").get<std::uint64_t>();
  r.config = j.at("config").get<std::string>();
  r.fidelity = std::strtod(j.at("fidelity").get<std::string>().c_str(), nullptr);
  r.iterations = j.at("iterations").get<int>();
  r.restarts = j.at("restarts").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_time = std::strtod(j.at("wall_time").get<std::string>().c_str(), nullptr);
  r.stage = parse_stage(j.at("stage").get<std::string>());
  return r;
}

ResultStore::ResultStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  if (fs::exists(records_path())) {
    std::ifstream in(records_path());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        merge(parse_json_line(line));
        ++log_size_;
      } catch (const std::exception& e) {
        // A torn final line from an interrupted write is dropped; anything else is corruption.
        if (in.peek() == EOF) break;
        throw std::runtime_error(records_path().string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  load_checkpoint();
}

void ResultStore::merge(const SearchRecord& record) {
  auto [it, inserted] = best_.try_emplace(record.config_id, record);
  if (!inserted && record.fidelity > it->second.fidelity) it->second = record;
}

void ResultStore::append(std::span<const SearchRecord> records) {
  if (records.empty()) return;
  std::ofstream out(records_path(), std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + records_path().string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed on " + records_path().string());
  for (const auto& r : records) {
    merge(r);
    ++log_size_;
  }
}

std::vector<SearchRecord> ResultStore::best_records() const {
  std::vector<SearchRecord> out;
  out.reserve(best_.size());
  for (const auto& [id, r] : best_) out.push_back(r);
  return out;
}

bool ResultStore::completed(std::uint64_t id) const {
  if (id >= total_) return false;
  return (bits_[id / 8] >> (id % 8)) & 1U;
}

void ResultStore::init_checkpoint(std::uint64_t total) {
  if (total == total_ && !bits_.empty()) return;
  if (completed_count_ != 0) {
    throw std::runtime_error("checkpoint in " + dir_.string() + " belongs to a different job size");
  }
  total_ = total;
  bits_.assign((total + 7) / 8, 0);
}

void ResultStore::mark_completed(std::span<const std::uint64_t> ids) {
  for (auto id : ids) {
    if (id >= total_) throw std::out_of_range("checkpoint: id out of range");
    std::uint8_t& byte = bits_[id / 8];
    const std::uint8_t bit = static_cast<std::uint8_t>(1U << (id % 8));
    if (!(byte & bit)) {
      byte |= bit;
      ++completed_count_;
    }
  }
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::ifstream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

}  // namespace

void ResultStore::save_checkpoint() const {
  const fs::path tmp = checkpoint_path().string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, 0);
    put<std::uint64_t>(out, total_);
    put<std::uint64_t>(out, completed_count_);
    out.write(reinterpret_cast<const char*>(bits_.data()), static_cast<std::streamsize>(bits_.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed on " + tmp.string());
  }
  fs::rename(tmp, checkpoint_path());
}

void ResultStore::load_checkpoint() {
  if (!fs::exists(checkpoint_path())) return;
  std::ifstream in(checkpoint_path(), std::ios::binary);
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(checkpoint_path().string() + ": bad magic");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error(checkpoint_path().string() + ": unsupported version " + std::to_string(version));
  }
  get<std::uint32_t>(in);
  total_ = get<std::uint64_t>(in);
  const auto declared = get<std::uint64_t>(in);
  bits_.assign((total_ + 7) / 8, 0);
  in.read(reinterpret_cast<char*>(bits_.data()), static_cast<std::streamsize>(bits_.size()));
  if (!in) throw std::runtime_error(checkpoint_path().string() + ": truncated bitset");
  completed_count_ = 0;
  for (auto byte : bits_) completed_count_ += static_cast<std::uint64_t>(std::popcount(byte));
  if (completed_count_ != declared) throw std::runtime_error(checkpoint_path().string() + ": count mismatch");
}

void ResultStore::clear() {
  fs::remove(records_path());
  fs::remove(checkpoint_path());
  fs::remove(manifest_path());
  best_.clear();
  log_size_ = 0;
  total_ = 0;
  completed_count_ = 0;
  bits_.clear();
}

}  // namespace qsynth
