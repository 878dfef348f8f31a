#include <gtest/gtest.h>

#include <set>

#include "qsynth/analysis.hpp"
#include "qsynth/search.hpp"

using namespace qsynth;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qsynth_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SearchJob small_job(const fs::path& out) {
  SearchJob job;
  job.target = {"random-state", 3, 17};
  job.n = 3;
  job.m = 2;
  job.N = 3;
  job.settings.max_iterations = 300;
  job.seed = 5;
  job.output = out;
  return job;
}

void expect_same_records(const ResultStore& a, const ResultStore& b) {
  ASSERT_EQ(a.best().size(), b.best().size());
  ASSERT_EQ(a.log_size(), b.log_size());
  for (const auto& [id, r] : a.best()) EXPECT_TRUE(r.same_result(b.best().at(id))) << id;
}

}  // namespace

TEST(RunSearch, OneRecordPerConfiguration) {
  TempDir dir("search_count");
  const SearchJob job = small_job(dir.path);
  ResultStore store(dir.path);
  EXPECT_EQ(run_search(job, store), 27u);
  EXPECT_EQ(store.best().size(), 27u);
  EXPECT_EQ(store.log_size(), 27u);
  EXPECT_EQ(store.completed_count(), 27u);
  for (const auto& [id, r] : store.best()) {
    EXPECT_EQ(r.seed, child_seed(job.seed, id));
    EXPECT_EQ(r.stage, Stage::initial);
    EXPECT_LE(r.fidelity, 1.0 + 1e-12);
  }
  EXPECT_TRUE(fs::exists(dir.path / "manifest.json"));
  EXPECT_EQ(run_search(job, store), 0u);
}

TEST(RunSearch, ResumeMatchesUninterrupted) {
  TempDir a("search_full"), b("search_resume");
  const SearchJob job = small_job(a.path);
  ResultStore full(a.path);
  run_search(job, full);

  RunOptions partial;
  partial.max_new = 10;
  partial.block_size = 4;
  {
    ResultStore s(b.path);
    EXPECT_EQ(run_search(job, s, partial), 10u);
    EXPECT_EQ(s.completed_count(), 10u);
  }
  ResultStore resumed(b.path);
  EXPECT_EQ(resumed.completed_count(), 10u);
  EXPECT_EQ(run_search(job, resumed), 17u);
  expect_same_records(full, resumed);
}

TEST(RunSearch, WorkerCountDoesNotChangeRecords) {
  TempDir a("search_w1"), b("search_w4");
  const SearchJob job = small_job(a.path);
  ResultStore one(a.path), four(b.path);
  run_search(job, one);
  RunOptions opts;
  opts.workers = 4;
  opts.block_size = 5;
  run_search(job, four, opts);
  expect_same_records(one, four);
}

TEST(RunSearch, RefusesDifferentJobInSameStore) {
  TempDir dir("search_conflict");
  SearchJob job = small_job(dir.path);
  ResultStore store(dir.path);
  RunOptions opts;
  opts.max_new = 1;
  run_search(job, store, opts);
  job.N = 2;
  EXPECT_THROW(run_search(job, store), std::runtime_error);
}

TEST(RunSearch, CapExceeded) {
  TempDir dir("search_cap");
  SearchJob job = small_job(dir.path);
  job.cap = 10;
  ResultStore store(dir.path);
  EXPECT_THROW(run_search(job, store), std::overflow_error);
}

TEST(Manifest, RoundTripReproducesStore) {
  TempDir a("manifest_a"), b("manifest_b");
  const SearchJob job = small_job(a.path);
  ResultStore first(a.path);
  run_search(job, first);
  SearchJob again = read_manifest(a.path);
  EXPECT_EQ(job_to_json(again), job_to_json(job));
  again.output = b.path;
  ResultStore second(b.path);
  run_search(again, second);
  expect_same_records(first, second);
}

TEST(Refine, FloorAboveOneTouchesNothing) {
  TempDir dir("refine_none");
  const SearchJob job = small_job(dir.path);
  ResultStore store(dir.path);
  run_search(job, store);
  RefineOptions ro;
  ro.fidelity_floor = 1.1;
  EXPECT_EQ(refine(job, store, ro), 0u);
  EXPECT_EQ(store.log_size(), 27u);
}

TEST(Refine, NeverDecreasesFidelity) {
  TempDir dir("refine_up");
  SearchJob job = small_job(dir.path);
  job.settings.max_iterations = 5;
  ResultStore store(dir.path);
  run_search(job, store);
  std::map<std::uint64_t, double> before;
  for (const auto& [id, r] : store.best()) before[id] = r.fidelity;
  RefineOptions ro;
  ro.fidelity_floor = 0.0;
  ro.settings.max_iterations = 200;
  ro.restarts = 2;
  const auto improved = refine(job, store, ro);
  EXPECT_GT(improved, 0u);
  for (const auto& [id, r] : store.best()) EXPECT_GE(r.fidelity, before[id]);
  EXPECT_EQ(store.log_size(), 27u + improved);
}

TEST(Closure, LowFidelityStoreUnchanged) {
  TempDir dir("closure_low");
  SearchJob job = small_job(dir.path);
  job.N = 1;
  ResultStore store(dir.path);
  run_search(job, store);
  EXPECT_EQ(permutation_closure(job, store, 1e-6), 0u);
}

TEST(Closure, PerfectOrbitFullyAssigned) {
  TempDir dir("closure_orbit");
  SearchJob job = small_job(dir.path);
  job.n = 4;
  job.target = {"random-state", 4, 1};
  job.N = 6;
  ResultStore store(dir.path);
  const ConfigSpace space = job.space();
  const auto id = space.encode(parse_config("6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)", 4));
  SearchRecord r;
  r.config_id = id;
  r.config = to_text(space.decode(id, 6));
  r.fidelity = 1.0 - 1e-14;
  std::vector<SearchRecord> one{r};
  store.append(one);
  const auto orbit = permutation_orbit(space, 6, id);
  EXPECT_EQ(orbit.size(), 24u);
  EXPECT_EQ(permutation_closure(job, store, 1e-6), 23u);
  for (auto member : orbit) EXPECT_EQ(store.best().at(member).fidelity, r.fidelity);
  EXPECT_EQ(perfect_set(store.best_records()).count(), 24u);
}

TEST(SampleSearch, DistinctSortedAndFull) {
  const ConfigSpace space(3, 2);
  const Target t = make_target({"random-state", 3, 2});
  OptimizerSettings s;
  s.max_iterations = 50;
  const auto part = sample_search(t, space, 4, 20, s, 1, 9);
  ASSERT_EQ(part.size(), 20u);
  for (std::size_t i = 1; i < part.size(); ++i) EXPECT_LT(part[i - 1].config_id, part[i].config_id);
  EXPECT_EQ(sample_search(t, space, 2, 100, s, 1, 9).size(), 9u);
  const auto again = sample_search(t, space, 4, 20, s, 1, 9, 3);
  for (std::size_t i = 0; i < part.size(); ++i) EXPECT_TRUE(part[i].same_result(again[i]));
}

TEST(FidelityVsN, TwoQubitStatePrep) {
  std::vector<Target> targets;
  for (std::uint64_t s = 0; s < 3; ++s) targets.push_back(make_target({"random-state", 2, s}));
  const auto series = fidelity_vs_N(targets, ConfigSpace(2, 2), 0, 2, OptimizerSettings{}, 1, 1);
  ASSERT_EQ(series.size(), 3u);
  EXPECT_LT(series[0].max_fidelity, 0.999);
  EXPECT_GT(series[1].max_fidelity, 1 - 1e-10);
  EXPECT_GT(series[2].max_fidelity, 1 - 1e-10);
  EXPECT_EQ(series[1].per_instance.size(), 3u);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::uint64_t i) {
                 if (i == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
  std::vector<int> hit(100, 0);
  parallel_for(100, 4, [&](std::uint64_t i) { hit[i]++; });
  for (int h : hit) EXPECT_EQ(h, 1);
}
