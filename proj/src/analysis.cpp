#include "qsynth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace qsynth {

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

Histogram histogram(std::span<const SearchRecord> records, Binning binning, int bins) {
  if (records.empty()) throw std::invalid_argument("histogram: empty store");
  Histogram h;
  h.binning = binning;
  if (binning == Binning::log_infidelity) {
    for (int e = -12; e <= 0; ++e) h.edges.push_back(std::pow(10.0, e));
    h.counts.assign(12, 0);
    for (const auto& r : records) {
      const double x = std::max(1.0 - r.fidelity, kClampInfidelity);
      auto bin = static_cast<int>(std::floor(std::log10(x))) + 12;
      // log10 of an exact power of ten can round down by one ulp.
      if (bin + 1 < static_cast<int>(h.edges.size()) && x >= h.edges[bin + 1]) ++bin;
      h.counts[std::clamp(bin, 0, 11)]++;
    }
  } else {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    for (int i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / bins);
    h.counts.assign(bins, 0);
    for (const auto& r : records) {
      const auto bin = static_cast<int>(std::floor(r.fidelity * bins));
      h.counts[std::clamp(bin, 0, bins - 1)]++;
    }
  }
  return h;
}

PerfectSet perfect_set(std::span<const SearchRecord> records, double tol, std::uint64_t total) {
  PerfectSet ps;
  ps.tol = tol;
  ps.total = total == 0 ? records.size() : total;
  for (const auto& r : records) {
    if (r.fidelity >= 1.0 - tol) ps.members.push_back(r);
  }
  std::sort(ps.members.begin(), ps.members.end(),
            [](const auto& a, const auto& b) { return a.config_id < b.config_id; });
  return ps;
}

std::size_t count_infidelity_below(std::span<const SearchRecord> records, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [&](const auto& r) { return 1.0 - r.fidelity < threshold; }));
}

std::map<int, std::uint64_t> depth_distribution(const PerfectSet& ps, int n) {
  std::map<int, std::uint64_t> out;
  for (const auto& r : ps.members) ++out[depth(parse_config(r.config, n))];
  return out;
}

std::map<std::pair<int, int>, int> pair_usage(const GateConfiguration& config) {
  if (config.m != 2) throw std::invalid_argument("pair_usage: needs two-qubit gates");
  std::map<std::pair<int, int>, int> out;
  for (int a = 0; a < config.n; ++a) {
    for (int b = a + 1; b < config.n; ++b) out[{a, b}] = 0;
  }
  for (const auto& g : config.gates) ++out[{std::min(g[0], g[1]), std::max(g[0], g[1])}];
  return out;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

OrbitReport orbit_report(const PerfectSet& ps, const ConfigSpace& space, int N, bool target_self_inverse) {
  OrbitReport report;
  report.reversal_applied = target_self_inverse;
  std::set<std::uint64_t> ids;
  for (const auto& r : ps.members) ids.insert(r.config_id);
  std::map<std::uint64_t, std::size_t> orbit_of;
  for (const auto& r : ps.members) {
    if (orbit_of.contains(r.config_id)) continue;
    auto orbit = permutation_orbit(space, N, r.config_id);
    // Only members of the set count; a partial set may hold part of an orbit.
    std::erase_if(orbit, [&](std::uint64_t id) { return !ids.contains(id); });
    for (auto id : orbit) orbit_of[id] = report.permutation_orbits.size();
    report.permutation_orbits.push_back(std::move(orbit));
  }

  std::vector<std::size_t> parent(report.permutation_orbits.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  if (target_self_inverse) {
    for (std::size_t i = 0; i < report.permutation_orbits.size(); ++i) {
      const auto rev = space.encode(reverse(space.decode(report.permutation_orbits[i].front(), N)));
      const auto it = orbit_of.find(rev);
      if (it == orbit_of.end()) continue;
      const auto a = find_root(parent, i);
      const auto b = find_root(parent, it->second);
      parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::size_t, std::vector<std::uint64_t>> classes;
  for (std::size_t i = 0; i < report.permutation_orbits.size(); ++i) {
    auto& c = classes[find_root(parent, i)];
    c.insert(c.end(), report.permutation_orbits[i].begin(), report.permutation_orbits[i].end());
  }
  for (auto& [root, members] : classes) {
    std::sort(members.begin(), members.end());
    report.merged_classes.push_back(std::move(members));
  }
  return report;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "binning,lo,hi,count\n";
  const char* name = h.binning == Binning::log_infidelity ? "log_infidelity" : "linear";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << name << ',' << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i]
        << '\n';
  }
}

void write_depth_csv(std::ostream& out, const std::map<int, std::uint64_t>& depths) {
  out << "depth,count\n";
  for (const auto& [d, c] : depths) out << d << ',' << c << '\n';
}

void write_orbit_csv(std::ostream& out, const OrbitReport& report, const ConfigSpace& space, int N) {
  out << "orbit,class,size,representative\n";
  for (std::size_t i = 0; i < report.permutation_orbits.size(); ++i) {
    const auto& orbit = report.permutation_orbits[i];
    std::size_t cls = 0;
    for (; cls < report.merged_classes.size(); ++cls) {
      if (std::binary_search(report.merged_classes[cls].begin(), report.merged_classes[cls].end(), orbit.front())) break;
    }
    out << i << ',' << cls << ',' << orbit.size() << ",\"" << to_text(space.decode(orbit.front(), N)) << "\"\n";
  }
}

void write_pairs_csv(std::ostream& out, const PerfectSet& ps, int n) {
  out << "config_id,config";
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) out << ',' << a << '-' << b;
  }
  out << ",unused\n";
  for (const auto& r : ps.members) {
    out << r.config_id << ",\"" << r.config << '"';
    std::string unused;
    for (const auto& [pair, count] : pair_usage(parse_config(r.config, n))) {
      out << ',' << count;
      if (count == 0) unused += (unused.empty() ? "" : " ") + std::to_string(pair.first) + '-' + std::to_string(pair.second);
    }
    out << ',' << unused << '\n';
  }
}

void write_series_csv(std::ostream& out, const std::vector<SeriesPoint>& series) {
  out << "N,F\n";
  for (const auto& p : series) out << p.N << ',' << format_double(p.max_fidelity) << '\n';
}

void write_bounds_csv(std::ostream& out, Task task, int n, const std::vector<int>& ms, int n_max) {
  out << "task,n,m,N,circuit_params,target_params,lower_bound\n";
  for (int m : ms) {
    const int lb = lower_bound(task, n, m);
    for (int N = 0; N <= n_max; ++N) {
      out << to_string(task) << ',' << n << ',' << m << ',' << N << ',' << circuit_params(task, n, m, N) << ','
          << target_params(task, n) << ',' << lb << '\n';
    }
  }
}

}  // namespace qsynth
