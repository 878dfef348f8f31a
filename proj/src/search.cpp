#include "qsynth/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace qsynth {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;
constexpr const char* kToolVersion = "0.1.0";
constexpr std::uint64_t kRefineStream = 0x5245'4649'4e45'0000ULL;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json settings_json(const OptimizerSettings& s) {
  ordered_json j;
  j["method"] = to_string(s.method);
  j["max_iterations"] = s.max_iterations;
  j["step_size"] = format_double(s.step_size);
  j["adaptive"] = s.adaptive;
  j["max_step_factor"] = format_double(s.max_step_factor);
  j["stop_infidelity"] = format_double(s.stop_infidelity);
  j["lbfgs_memory"] = s.lbfgs_memory;
  return j;
}

double parse_double(const nlohmann::json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

OptimizerSettings settings_from(const nlohmann::json& j) {
  OptimizerSettings s;
  s.method = parse_method(j.at("method").get<std::string>());
  s.max_iterations = j.at("max_iterations").get<int>();
  s.step_size = parse_double(j.at("step_size"));
  s.adaptive = j.at("adaptive").get<bool>();
  s.max_step_factor = parse_double(j.at("max_step_factor"));
  s.stop_infidelity = parse_double(j.at("stop_infidelity"));
  s.lbfgs_memory = j.at("lbfgs_memory").get<int>();
  return s;
}

ordered_json job_object(const SearchJob& job) {
  ordered_json j;
  j["target"] = {{"source", job.target.source}, {"n", job.target.n}, {"seed", job.target.seed}};
  j["n"] = job.n;
  j["m"] = job.m;
  j["N"] = job.N;
  j["kind"] = to_string(job.kind);
  j["settings"] = settings_json(job.settings);
  j["restarts"] = job.restarts;
  j["seed"] = job.seed;
  j["instance_id"] = job.instance_id;
  j["output"] = job.output.string();
  j["cap"] = job.cap;
  return j;
}

SearchJob job_from_object(const nlohmann::json& j) {
  SearchJob job;
  const auto& t = j.at("target");
  job.target.source = t.at("source").get<std::string>();
  job.target.n = t.at("n").get<int>();
  job.target.seed = t.at("seed").get<std::uint64_t>();
  job.n = j.at("n").get<int>();
  job.m = j.at("m").get<int>();
  job.N = j.at("N").get<int>();
  job.kind = parse_entangler(j.at("kind").get<std::string>());
  job.settings = settings_from(j.at("settings"));
  job.restarts = j.at("restarts").get<int>();
  job.seed = j.at("seed").get<std::uint64_t>();
  job.instance_id = j.at("instance_id").get<std::uint64_t>();
  job.output = j.at("output").get<std::string>();
  job.cap = j.at("cap").get<std::uint64_t>();
  return job;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

void write_json_atomic(const fs::path& path, const ordered_json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed on " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Everything that determines the records; the output location may move.
bool same_job(const SearchJob& a, const SearchJob& b) {
  auto ja = job_object(a);
  auto jb = job_object(b);
  ja.erase("output");
  jb.erase("output");
  return ja == jb;
}

void validate(const SearchJob& job) {
  if (job.n < 1 || job.n > kMaxQubits) throw std::invalid_argument("search: n out of range");
  if (job.N < 0) throw std::invalid_argument("search: N must be >= 0");
  if (job.restarts < 1) throw std::invalid_argument("search: restarts must be >= 1");
  if (job.target.n != 0 && job.target.n != job.n) {
    throw std::invalid_argument("search: target qubit count differs from n");
  }
}

Target resolve_target(const SearchJob& job) {
  TargetSpec spec = job.target;
  if (spec.n == 0) spec.n = job.n;
  Target t = make_target(spec);
  if (t.n != job.n) throw std::invalid_argument("search: target has " + std::to_string(t.n) + " qubits, job has " + std::to_string(job.n));
  return t;
}

SearchRecord to_record(std::uint64_t id, const GateConfiguration& config, const OptResult& r,
                       std::uint64_t seed, double wall, Stage stage) {
  SearchRecord rec;
  rec.config_id = id;
  rec.config = to_text(config);
  rec.fidelity = r.final_fidelity;
  rec.iterations = static_cast<int>(r.total_iterations);
  rec.restarts = r.restarts_used;
  rec.seed = seed;
  rec.wall_time = wall;
  rec.stage = stage;
  return rec;
}

SearchRecord optimise_record(const GateConfiguration& config, std::uint64_t id, const Target& target,
                             OptimizerSettings settings, std::uint64_t seed, int restarts, Stage stage,
                             double early_exit) {
  const auto start = std::chrono::steady_clock::now();
  settings.seed = seed;
  const OptResult r = multi_restart(config, target, settings, restarts, early_exit);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return to_record(id, config, r, seed, wall, stage);
}

}  // namespace

std::string to_string(EntanglerKind kind) {
  return kind == EntanglerKind::controlled_u ? "controlled-u" : "cz";
}

EntanglerKind parse_entangler(const std::string& text) {
  if (text == "cz") return EntanglerKind::cz;
  if (text == "controlled-u" || text == "cu") return EntanglerKind::controlled_u;
  throw std::invalid_argument("unknown entangler '" + text + "' (expected cz or controlled-u)");
}

std::string job_to_json(const SearchJob& job) { return job_object(job).dump(); }

SearchJob job_from_json(const std::string& text) { return job_from_object(nlohmann::json::parse(text)); }

void write_manifest(const SearchJob& job, const std::string& command) {
  ordered_json j;
  j["format"] = "qsynth-manifest";
  j["version"] = kManifestVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["created"] = utc_timestamp();
  j["store"] = {{"records", "records.jsonl"}, {"checkpoint", "checkpoint.bin"}};
  j["job"] = job_object(job);
  j["stages"] = ordered_json::array();
  fs::create_directories(job.output);
  write_json_atomic(job.output / "manifest.json", j);
}

void append_manifest_stage(const fs::path& dir, const std::string& stage_json) {
  const fs::path path = dir / "manifest.json";
  auto j = ordered_json::parse(read_json(path).dump());
  auto stage = ordered_json::parse(stage_json);
  stage["timestamp"] = utc_timestamp();
  j["stages"].push_back(stage);
  write_json_atomic(path, j);
}

SearchJob read_manifest(const fs::path& dir) {
  const auto j = read_json(dir / "manifest.json");
  if (j.value("format", "") != "qsynth-manifest") throw std::runtime_error(dir.string() + ": not a qsynth manifest");
  if (j.at("version").get<int>() != kManifestVersion) {
    throw std::runtime_error(dir.string() + ": unsupported manifest version");
  }
  SearchJob job = job_from_object(j.at("job"));
  job.output = dir;
  return job;
}

void parallel_for(std::uint64_t count, int workers, const std::function<void(std::uint64_t)>& fn) {
  if (count == 0) return;
  const auto threads = static_cast<std::uint64_t>(std::max(1, workers));
  if (threads == 1 || count == 1) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t t = 0; t < std::min(threads, count); ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::uint64_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
            return;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

SearchRecord evaluate_config(const SearchJob& job, const Target& target, std::uint64_t config_id) {
  const GateConfiguration config = job.space().decode(config_id, job.N);
  return optimise_record(config, config_id, target, job.settings, child_seed(job.seed, config_id), job.restarts,
                         Stage::initial, job.settings.stop_infidelity);
}

std::uint64_t run_search(const SearchJob& job, ResultStore& store, const RunOptions& options) {
  validate(job);
  const ConfigSpace space = job.space();
  const std::uint64_t total = space.size(job.N, job.cap);
  const Target target = resolve_target(job);

  if (fs::exists(store.manifest_path())) {
    const SearchJob recorded = read_manifest(store.dir());
    if (!same_job(recorded, job)) {
      throw std::runtime_error(store.dir().string() + " holds a different job; use a fresh directory");
    }
  } else {
    SearchJob stored = job;
    stored.output = store.dir();
    write_manifest(stored, options.command);
  }
  store.init_checkpoint(total);

  std::vector<std::uint64_t> pending;
  for (std::uint64_t id = 0; id < total; ++id) {
    if (!store.completed(id)) pending.push_back(id);
  }
  if (options.max_new != 0 && pending.size() > options.max_new) pending.resize(options.max_new);

  const std::uint64_t block = std::max<std::uint64_t>(1, options.block_size);
  std::uint64_t done = 0;
  for (std::size_t begin = 0; begin < pending.size(); begin += block) {
    const std::size_t end = std::min<std::size_t>(pending.size(), begin + block);
    std::vector<SearchRecord> records(end - begin);
    parallel_for(records.size(), options.workers,
                 [&](std::uint64_t i) { records[i] = evaluate_config(job, target, pending[begin + i]); });
    store.append(records);
    store.mark_completed(std::span<const std::uint64_t>(pending.data() + begin, end - begin));
    store.save_checkpoint();
    done += records.size();
    if (options.progress) options.progress(store.completed_count(), total);
  }
  return done;
}

std::uint64_t refine(const SearchJob& job, ResultStore& store, const RefineOptions& refine_options,
                     const RunOptions& options) {
  validate(job);
  const ConfigSpace space = job.space();
  const Target target = resolve_target(job);
  const double stop = refine_options.settings.stop_infidelity;

  std::vector<SearchRecord> candidates;
  for (const auto& [id, rec] : store.best()) {
    if (rec.fidelity > refine_options.fidelity_floor && 1.0 - rec.fidelity >= stop) candidates.push_back(rec);
  }

  const std::uint64_t block = std::max<std::uint64_t>(1, options.block_size);
  std::uint64_t improved = 0;
  for (std::size_t begin = 0; begin < candidates.size(); begin += block) {
    const std::size_t end = std::min<std::size_t>(candidates.size(), begin + block);
    std::vector<SearchRecord> results(end - begin);
    parallel_for(results.size(), options.workers, [&](std::uint64_t i) {
      const SearchRecord& old = candidates[begin + i];
      const std::uint64_t seed =
          child_seed(child_seed(job.seed, old.config_id), kRefineStream + static_cast<std::uint64_t>(refine_options.pass));
      results[i] = optimise_record(space.decode(old.config_id, job.N), old.config_id, target, refine_options.settings,
                                   seed, refine_options.restarts, Stage::refined, stop);
    });
    std::vector<SearchRecord> better;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].fidelity > candidates[begin + i].fidelity) better.push_back(std::move(results[i]));
    }
    store.append(better);
    improved += better.size();
    if (options.progress) options.progress(end, candidates.size());
  }
  return improved;
}

std::vector<std::uint64_t> permutation_orbit(const ConfigSpace& space, int N, std::uint64_t config_id) {
  const GateConfiguration config = space.decode(config_id, N);
  std::vector<std::uint64_t> out;
  for (const auto& perm : all_permutations(space.n())) out.push_back(space.encode(permute(config, perm)));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::uint64_t permutation_closure(const SearchJob& job, ResultStore& store, double tol) {
  const ConfigSpace space = job.space();
  std::set<std::uint64_t> visited;
  std::vector<SearchRecord> assigned;
  for (const auto& [id, rec] : store.best()) {
    if (visited.contains(id)) continue;
    const auto orbit = permutation_orbit(space, job.N, id);
    visited.insert(orbit.begin(), orbit.end());

    const SearchRecord* source = nullptr;
    for (auto member : orbit) {
      const auto it = store.best().find(member);
      if (it != store.best().end() && (!source || it->second.fidelity > source->fidelity)) source = &it->second;
    }
    if (!source || source->fidelity < 1.0 - tol) continue;

    for (auto member : orbit) {
      const auto it = store.best().find(member);
      if (it != store.best().end() && it->second.fidelity >= source->fidelity) continue;
      SearchRecord r;
      r.config_id = member;
      r.config = to_text(space.decode(member, job.N));
      r.fidelity = source->fidelity;
      r.seed = source->seed;
      r.stage = Stage::closure;
      assigned.push_back(std::move(r));
    }
  }
  store.append(assigned);
  return assigned.size();
}

std::vector<SearchRecord> sample_search(const Target& target, const ConfigSpace& space, int N, std::uint64_t count,
                                        const OptimizerSettings& settings, int restarts, std::uint64_t seed,
                                        int workers, double early_exit_infidelity) {
  const std::uint64_t total = space.size(N);
  std::vector<std::uint64_t> ids;
  if (count >= total) {
    ids.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) ids[i] = i;
  } else {
    // Floyd's algorithm: `count` distinct ids, uniformly.
    Rng rng(seed);
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = total - count; j < total; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    ids.assign(chosen.begin(), chosen.end());
  }
  std::vector<SearchRecord> out(ids.size());
  parallel_for(ids.size(), workers, [&](std::uint64_t i) {
    out[i] = optimise_record(space.decode(ids[i], N), ids[i], target, settings, child_seed(seed, ids[i]), restarts,
                             Stage::initial, early_exit_infidelity);
  });
  return out;
}

std::vector<SeriesPoint> fidelity_vs_N(const std::vector<Target>& targets, const ConfigSpace& space, int n_min,
                                       int n_max, const OptimizerSettings& settings, int restarts,
                                       std::uint64_t seed, int workers) {
  if (targets.empty()) throw std::invalid_argument("fidelity_vs_N: no targets");
  if (n_min < 0 || n_max < n_min) throw std::invalid_argument("fidelity_vs_N: bad N range");
  std::vector<SeriesPoint> series;
  for (int N = n_min; N <= n_max; ++N) {
    SeriesPoint p;
    p.N = N;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const std::uint64_t s = child_seed(child_seed(seed, static_cast<std::uint64_t>(N)), t);
      const auto records = sample_search(targets[t], space, N, ~std::uint64_t{0}, settings, restarts, s, workers,
                                         settings.stop_infidelity);
      const auto best = std::max_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.fidelity < b.fidelity;
      });
      p.per_instance.push_back(best->fidelity);
      p.best_config.push_back(best->config_id);
    }
    p.max_fidelity = *std::min_element(p.per_instance.begin(), p.per_instance.end());
    series.push_back(std::move(p));
  }
  return series;
}

}  // namespace qsynth
