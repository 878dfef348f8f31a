// qsynth: minimum-entangling-gate search from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsynth/analysis.hpp"
#include "qsynth/bounds.hpp"
#include "qsynth/grape.hpp"
#include "qsynth/search.hpp"

namespace fs = std::filesystem;
using namespace qsynth;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

fs::path cache_root() {
  if (const char* env = std::getenv("QSYNTH_CACHE"); env && *env) return env;
  return "qsynth-cache";
}

struct SettingsFlags {
  std::string method = "lbfgs";
  int iterations = 1000;
  double step = 0.05;
  bool fixed_step = false;
  double max_step_factor = 1.0;
  double stop = 1e-13;
  int memory = 10;

  void add(CLI::App* app, int default_iterations) {
    iterations = default_iterations;
    app->add_option("--method", method, "gradient | lbfgs")->capture_default_str();
    app->add_option("--iterations", iterations, "Iteration budget per restart")->capture_default_str();
    app->add_option("--step", step, "Step size")->capture_default_str();
    app->add_flag("--fixed-step", fixed_step, "Disable the adaptive step (gradient method)");
    app->add_option("--max-step-factor", max_step_factor, "Adaptive step cap as a multiple of --step")
        ->capture_default_str();
    app->add_option("--stop", stop, "Stop once 1-F falls below this")->capture_default_str();
    app->add_option("--lbfgs-memory", memory, "L-BFGS history length")->capture_default_str();
  }

  OptimizerSettings get() const {
    OptimizerSettings s;
    s.method = parse_method(method);
    s.max_iterations = iterations;
    s.step_size = step;
    s.adaptive = !fixed_step;
    s.max_step_factor = max_step_factor;
    s.stop_infidelity = stop;
    s.lbfgs_memory = memory;
    return s;
  }
};

struct TargetFlags {
  std::string source = "random-state";
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--target", source,
                    "random-state | random-unitary | toffoli3 | toffoli:<n> | ccz:<n> | file:<path>")
        ->capture_default_str();
    app->add_option("--target-seed", seed, "Seed for random targets")->capture_default_str();
  }

  TargetSpec get(int n) const { return TargetSpec{source, n, seed}; }
};

std::string store_name(const SearchJob& job) {
  std::string name = job.target.source;
  for (char& c : name) {
    if (c == ':' || c == '/') c = '_';
  }
  return name + "-n" + std::to_string(job.n) + (job.kind == EntanglerKind::controlled_u ? "-cu" : "-m" + std::to_string(job.m)) +
         "-N" + std::to_string(job.N) + "-t" + std::to_string(job.target.seed) + "-s" + std::to_string(job.seed);
}

void progress_line(std::uint64_t done, std::uint64_t total) {
  std::cerr << "\r" << done << "/" << total << std::flush;
  if (done == total) std::cerr << '\n';
}

std::vector<SearchRecord> load_records(const fs::path& dir) {
  ResultStore store(dir);
  return store.best_records();
}

// ---------------------------------------------------------------- gen-target

void add_gen_target(CLI::App& app) {
  auto* cmd = app.add_subcommand("gen-target", "Write a target state or operator to a JSON file");
  auto target = std::make_shared<TargetFlags>();
  auto n = std::make_shared<int>(3);
  auto out = std::make_shared<std::string>();
  target->add(cmd);
  cmd->add_option("--n", *n, "Qubits")->capture_default_str();
  cmd->add_option("--out", *out, "Output file")->required();
  cmd->callback([=] {
    write_target_file(*out, make_target(target->get(*n)));
    std::cout << *out << '\n';
  });
}

// ---------------------------------------------------------------- bounds

void add_bounds(CLI::App& app) {
  auto* cmd = app.add_subcommand("bounds", "Parameter-counting lower bounds on the gate count");
  auto task = std::make_shared<std::string>("state");
  auto n = std::make_shared<int>(3);
  auto ms = std::make_shared<std::vector<int>>(std::vector<int>{2});
  auto table = std::make_shared<bool>(false);
  auto n_max = std::make_shared<int>(-1);
  cmd->add_option("--task", *task, "state | unitary")->capture_default_str();
  cmd->add_option("--n", *n, "Qubits")->capture_default_str();
  cmd->add_option("--m", *ms, "Gate arities, comma separated")->delimiter(',');
  cmd->add_flag("--table", *table, "Emit circuit_params for every N up to --N-max");
  cmd->add_option("--N-max", *n_max, "Largest N in the table (default: largest bound + 2)");
  cmd->callback([=] {
    const Task t = parse_task(*task);
    for (int m : *ms) {
      if (m < 2 || m > *n) throw CLI::ValidationError("--m", "need 2 <= m <= n, got m=" + std::to_string(m));
    }
    if (*table) {
      int top = *n_max;
      if (top < 0) {
        for (int m : *ms) top = std::max(top, lower_bound(t, *n, m) + 2);
      }
      write_bounds_csv(std::cout, t, *n, *ms, top);
      return;
    }
    std::cout << "task,n,m,lower_bound\n";
    for (int m : *ms) std::cout << to_string(t) << ',' << *n << ',' << m << ',' << lower_bound(t, *n, m) << '\n';
  });
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  int n = 3;
  int m = 2;
  std::string kind = "cz";
  std::string config;
  std::int64_t config_id = -1;
  int N = 0;
  TargetFlags target;
  SettingsFlags settings;
  std::uint64_t seed = 0;
  int restarts = 1;
  double tol = 1e-8;
  std::string out;
};

std::string result_json(const OptResult& r, const GateConfiguration& config, double tol) {
  nlohmann::ordered_json j;
  j["config"] = to_text(config);
  j["seed"] = r.seed;
  j["initial_fidelity"] = format_double(r.initial_fidelity);
  j["final_fidelity"] = format_double(r.final_fidelity);
  j["infidelity"] = format_double(1.0 - r.final_fidelity);
  j["iterations_used"] = r.iterations_used;
  j["restarts_used"] = r.restarts_used;
  j["total_iterations"] = r.total_iterations;
  j["tolerance"] = format_double(tol);
  j["success"] = 1.0 - r.final_fidelity < tol;
  auto rot = nlohmann::ordered_json::array();
  for (const auto& s : r.circuit.rotations) {
    auto m = nlohmann::ordered_json::array();
    for (const auto& c : s.m) m.push_back({format_double(c.real()), format_double(c.imag())});
    rot.push_back(m);
  }
  j["rotations"] = rot;
  return j.dump(2);
}

void add_optimize(CLI::App& app, int& exit_code) {
  auto* cmd = app.add_subcommand("optimize", "Optimise the rotations of one gate configuration");
  auto a = std::make_shared<OptimizeArgs>();
  cmd->add_option("--n", a->n, "Qubits")->capture_default_str();
  cmd->add_option("--m", a->m, "CZ arity")->capture_default_str();
  cmd->add_option("--kind", a->kind, "cz | controlled-u")->capture_default_str();
  cmd->add_option("--config", a->config, "Configuration text, e.g. \"6@2: (0,1)(0,1)(0,2)(1,2)(0,2)(1,2)\"");
  cmd->add_option("--config-id", a->config_id, "Configuration index (with --N)");
  cmd->add_option("--N", a->N, "Gate count for --config-id")->capture_default_str();
  a->target.add(cmd);
  a->settings.add(cmd, 10'000);
  cmd->add_option("--seed", a->seed, "Seed for the initial rotations")->capture_default_str();
  cmd->add_option("--restarts", a->restarts, "Random restarts")->capture_default_str();
  cmd->add_option("--tol", a->tol, "Exit 0 iff 1-F < tol")->capture_default_str();
  cmd->add_option("--out", a->out, "Also write the JSON result here");
  cmd->callback([a, &exit_code] {
    GateConfiguration config;
    if (!a->config.empty()) {
      config = parse_config(a->config, a->n);
    } else if (a->config_id >= 0) {
      config = ConfigSpace(a->n, a->m, parse_entangler(a->kind)).decode(static_cast<std::uint64_t>(a->config_id), a->N);
    } else {
      throw CLI::ValidationError("optimize", "one of --config or --config-id is required");
    }
    const Target target = make_target(a->target.get(a->n));
    if (target.n != config.n) throw CLI::ValidationError("optimize", "target and configuration qubit counts differ");
    OptimizerSettings s = a->settings.get();
    s.seed = a->seed;
    const OptResult r = multi_restart(config, target, s, a->restarts, s.stop_infidelity);
    const std::string json = result_json(r, config, a->tol);
    std::cout << json << '\n';
    if (!a->out.empty()) std::ofstream(a->out) << json << '\n';
    exit_code = 1.0 - r.final_fidelity < a->tol ? 0 : kExitFail;
  });
}

// ---------------------------------------------------------------- search

struct SearchArgs {
  int n = 3;
  int m = 2;
  int N = 1;
  std::string kind = "cz";
  TargetFlags target;
  SettingsFlags settings;
  int restarts = 1;
  std::uint64_t seed = 0;
  int instances = 1;
  std::string out;
  std::string from_manifest;
  int workers = 1;
  bool resume = false;
  std::uint64_t max_configs = 0;
  std::uint64_t cap = kDefaultConfigCap;
  bool quiet = false;
};

void add_search(CLI::App& app) {
  auto* cmd = app.add_subcommand("search", "Sweep every gate configuration of a given size");
  auto a = std::make_shared<SearchArgs>();
  cmd->add_option("--n", a->n, "Qubits")->capture_default_str();
  cmd->add_option("--m", a->m, "CZ arity")->capture_default_str();
  cmd->add_option("--N", a->N, "Entangling gates")->capture_default_str();
  cmd->add_option("--kind", a->kind, "cz | controlled-u")->capture_default_str();
  a->target.add(cmd);
  a->settings.add(cmd, 1000);
  cmd->add_option("--restarts", a->restarts, "Restarts per configuration")->capture_default_str();
  cmd->add_option("--seed", a->seed, "Job seed")->capture_default_str();
  cmd->add_option("--instances", a->instances, "Random target instances (sibling stores instance-<i>)")
      ->capture_default_str();
  cmd->add_option("--out", a->out, "Store directory (default: $QSYNTH_CACHE/<derived name>)");
  cmd->add_option("--from-manifest", a->from_manifest, "Rerun the job recorded in this store's manifest");
  cmd->add_option("--workers", a->workers, "Worker threads (results do not depend on this)")->capture_default_str();
  cmd->add_flag("--resume", a->resume, "Continue from an existing checkpoint");
  cmd->add_option("--max-configs", a->max_configs, "Stop after this many new configurations");
  cmd->add_option("--cap", a->cap, "Refuse configuration spaces larger than this")->capture_default_str();
  cmd->add_flag("--quiet", a->quiet, "No progress output");
  cmd->callback([a] {
    std::vector<SearchJob> jobs;
    if (!a->from_manifest.empty()) {
      SearchJob job = read_manifest(a->from_manifest);
      if (a->out.empty()) throw CLI::ValidationError("--out", "required with --from-manifest");
      job.output = a->out;
      jobs.push_back(job);
    } else {
      SearchJob base;
      base.n = a->n;
      base.m = a->m;
      base.N = a->N;
      base.kind = parse_entangler(a->kind);
      if (base.kind == EntanglerKind::controlled_u) base.m = 2;
      base.target = a->target.get(a->n);
      base.settings = a->settings.get();
      base.restarts = a->restarts;
      base.seed = a->seed;
      base.cap = a->cap;
      const fs::path root = a->out.empty() ? cache_root() / store_name(base) : fs::path(a->out);
      for (int i = 0; i < a->instances; ++i) {
        SearchJob job = base;
        job.instance_id = static_cast<std::uint64_t>(i);
        if (a->instances > 1) {
          job.target.seed = child_seed(a->target.seed, job.instance_id);
          job.output = root / ("instance-" + std::to_string(i));
        } else {
          job.output = root;
        }
        jobs.push_back(job);
      }
    }
    for (const auto& job : jobs) {
      ResultStore store(job.output);
      if (!a->resume && (store.log_size() > 0 || store.completed_count() > 0)) {
        throw std::runtime_error(job.output.string() + " already holds results; pass --resume or use a new --out");
      }
      RunOptions options;
      options.workers = a->workers;
      options.max_new = a->max_configs;
      options.command = "search";
      if (!a->quiet) options.progress = progress_line;
      run_search(job, store, options);
      double best = 0.0;
      for (const auto& [id, r] : store.best()) best = std::max(best, r.fidelity);
      std::cout << job.output.string() << ' ' << store.completed_count() << '/' << store.checkpoint_total()
                << " max_F=" << format_double(best) << '\n';
    }
  });
}

// ---------------------------------------------------------------- refine / closure

std::vector<fs::path> expand_stores(const std::vector<std::string>& dirs) {
  std::vector<fs::path> out;
  for (const auto& d : dirs) {
    if (fs::exists(fs::path(d) / "manifest.json")) {
      out.emplace_back(d);
      continue;
    }
    std::vector<fs::path> children;
    if (fs::is_directory(d)) {
      for (const auto& e : fs::directory_iterator(d)) {
        if (fs::exists(e.path() / "manifest.json")) children.push_back(e.path());
      }
    }
    if (children.empty()) throw std::runtime_error(d + ": no manifest found");
    std::sort(children.begin(), children.end());
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

void add_refine(CLI::App& app) {
  auto* cmd = app.add_subcommand("refine", "Re-optimise the high-fidelity configurations of a store");
  auto stores = std::make_shared<std::vector<std::string>>();
  auto floor = std::make_shared<double>(0.999);
  auto settings = std::make_shared<SettingsFlags>();
  auto restarts = std::make_shared<int>(5);
  auto pass = std::make_shared<int>(0);
  auto workers = std::make_shared<int>(1);
  cmd->add_option("--store", *stores, "Store directories (or parents of instance-<i>)")->required();
  cmd->add_option("--floor", *floor, "Refine configurations with F above this")->capture_default_str();
  settings->add(cmd, 10'000);
  cmd->add_option("--restarts", *restarts, "Restarts per configuration")->capture_default_str();
  cmd->add_option("--pass", *pass, "Pass number (selects a fresh seed stream)")->capture_default_str();
  cmd->add_option("--workers", *workers, "Worker threads")->capture_default_str();
  cmd->callback([=] {
    for (const auto& dir : expand_stores(*stores)) {
      const SearchJob job = read_manifest(dir);
      ResultStore store(dir);
      RefineOptions ro;
      ro.fidelity_floor = *floor;
      ro.settings = settings->get();
      ro.restarts = *restarts;
      ro.pass = *pass;
      RunOptions options;
      options.workers = *workers;
      const auto improved = refine(job, store, ro, options);
      nlohmann::ordered_json stage{{"stage", "refine"},
                                   {"floor", format_double(*floor)},
                                   {"restarts", *restarts},
                                   {"pass", *pass},
                                   {"settings", nlohmann::ordered_json::parse(job_to_json([&] {
                                      SearchJob j = job;
                                      j.settings = ro.settings;
                                      return j;
                                    }()))["settings"]},
                                   {"improved", improved}};
      append_manifest_stage(dir, stage.dump());
      std::cout << dir.string() << " improved=" << improved << '\n';
    }
  });
}

void add_closure(CLI::App& app) {
  auto* cmd = app.add_subcommand("closure", "Extend perfect fidelities across qubit-permutation orbits");
  auto stores = std::make_shared<std::vector<std::string>>();
  auto tol = std::make_shared<double>(1e-6);
  cmd->add_option("--store", *stores, "Store directories (or parents of instance-<i>)")->required();
  cmd->add_option("--tol", *tol, "Orbit maximum must satisfy 1-F < tol")->capture_default_str();
  cmd->callback([=] {
    for (const auto& dir : expand_stores(*stores)) {
      const SearchJob job = read_manifest(dir);
      ResultStore store(dir);
      const auto assigned = permutation_closure(job, store, *tol);
      nlohmann::ordered_json stage{{"stage", "closure"}, {"tol", format_double(*tol)}, {"assigned", assigned}};
      append_manifest_stage(dir, stage.dump());
      std::cout << dir.string() << " assigned=" << assigned << '\n';
    }
  });
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::vector<std::string> stores;
  double tol = 1e-12;
  bool depth = false;
  std::string histogram;
  int bins = 20;
  bool orbits = false;
  bool pairs = false;
  bool series = false;
  bool summary = false;
  std::string out_dir;
};

void emit(const AnalyzeArgs& a, const std::string& name, const std::function<void(std::ostream&)>& fn) {
  if (a.out_dir.empty()) {
    fn(std::cout);
    return;
  }
  fs::create_directories(a.out_dir);
  const fs::path path = fs::path(a.out_dir) / (name + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  fn(out);
  std::cout << path.string() << '\n';
}

void add_analyze(CLI::App& app) {
  auto* cmd = app.add_subcommand("analyze", "Statistics and CSV exports from result stores");
  auto a = std::make_shared<AnalyzeArgs>();
  cmd->add_option("--store", a->stores, "Store directories (or parents of instance-<i>)")->required();
  cmd->add_option("--tol", a->tol, "Perfect-set tolerance on 1-F")->capture_default_str();
  cmd->add_flag("--depth", a->depth, "Depth distribution of the perfect set");
  cmd->add_option("--histogram", a->histogram, "log | linear");
  cmd->add_option("--bins", a->bins, "Bins for the linear histogram")->capture_default_str();
  cmd->add_flag("--orbits", a->orbits, "Permutation / time-reversal orbits of the perfect set");
  cmd->add_flag("--pairs", a->pairs, "Qubit-pair usage of the perfect set");
  cmd->add_flag("--series", a->series, "Max fidelity per N (minimum over instances)");
  cmd->add_flag("--summary", a->summary, "Record count, maximum fidelity and perfect count");
  cmd->add_option("--out-dir", a->out_dir, "Write <name>.csv files here instead of stdout");
  cmd->callback([a] {
    const auto dirs = expand_stores(a->stores);
    if (a->series) {
      std::map<int, std::vector<double>> per_n;
      for (const auto& dir : dirs) {
        const SearchJob job = read_manifest(dir);
        double best = 0.0;
        for (const auto& r : load_records(dir)) best = std::max(best, r.fidelity);
        per_n[job.N].push_back(best);
      }
      std::vector<SeriesPoint> series;
      for (auto& [N, values] : per_n) {
        SeriesPoint p;
        p.N = N;
        p.per_instance = values;
        p.max_fidelity = *std::min_element(values.begin(), values.end());
        series.push_back(p);
      }
      emit(*a, "series", [&](std::ostream& out) { write_series_csv(out, series); });
    }
    const bool per_store = a->depth || !a->histogram.empty() || a->orbits || a->pairs || a->summary || !a->series;
    if (!per_store) return;
    for (const auto& dir : dirs) {
      const SearchJob job = read_manifest(dir);
      const auto records = load_records(dir);
      const ConfigSpace space = job.space();
      const PerfectSet ps = perfect_set(records, a->tol, space.size(job.N, job.cap));
      const std::string prefix = dirs.size() > 1 ? dir.filename().string() + "-" : "";
      if (a->summary || !(a->depth || !a->histogram.empty() || a->orbits || a->pairs)) {
        double best = 0.0;
        for (const auto& r : records) best = std::max(best, r.fidelity);
        std::cout << dir.string() << " records=" << records.size() << " max_F=" << format_double(best)
                  << " perfect=" << ps.count() << " fraction=" << format_double(ps.fraction()) << '\n';
      }
      if (!a->histogram.empty()) {
        const Binning b = a->histogram == "linear" ? Binning::linear : Binning::log_infidelity;
        if (a->histogram != "linear" && a->histogram != "log") throw CLI::ValidationError("--histogram", "log | linear");
        const Histogram h = histogram(records, b, a->bins);
        emit(*a, prefix + "histogram", [&](std::ostream& out) { write_histogram_csv(out, h); });
      }
      if (a->depth) {
        emit(*a, prefix + "depth", [&](std::ostream& out) { write_depth_csv(out, depth_distribution(ps, job.n)); });
      }
      if (a->orbits) {
        const bool self_inverse = is_self_inverse(make_target(TargetSpec{job.target.source, job.n, job.target.seed}));
        const OrbitReport report = orbit_report(ps, space, job.N, self_inverse);
        std::cerr << "permutation orbits: " << report.permutation_orbits.size()
                  << ", after reversal merging: " << report.merged_classes.size()
                  << (report.reversal_applied ? "" : " (target not self-inverse; no merging)") << '\n';
        emit(*a, prefix + "orbits", [&](std::ostream& out) { write_orbit_csv(out, report, space, job.N); });
      }
      if (a->pairs) {
        emit(*a, prefix + "pairs", [&](std::ostream& out) { write_pairs_csv(out, ps, job.n); });
      }
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsynth: minimum-entangling-gate circuit search"};
  app.require_subcommand(1);
  int exit_code = 0;
  add_gen_target(app);
  add_bounds(app);
  add_optimize(app, exit_code);
  add_search(app);
  add_refine(app);
  add_closure(app);
  add_analyze(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return exit_code;
}
