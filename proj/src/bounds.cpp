#include "qsynth/bounds.hpp"

#include <stdexcept>

namespace qsynth {

namespace {

void check(int n, int m) {
  if (n < 1 || n > 30) throw std::invalid_argument("bounds: qubit count out of range");
  if (m < 2 || m > n) throw std::invalid_argument("bounds: need 2 <= m <= n");
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return a <= 0 ? 0 : (a + b - 1) / b; }

}  // namespace

Task parse_task(const std::string& text) {
  if (text == "state" || text == "state_prep") return Task::state_prep;
  if (text == "unitary") return Task::unitary;
  throw std::invalid_argument("unknown task '" + text + "' (expected state or unitary)");
}

std::string to_string(Task task) { return task == Task::state_prep ? "state" : "unitary"; }

std::int64_t circuit_params(Task task, int n, int m, int N) {
  check(n, m);
  if (N < 0) throw std::invalid_argument("bounds: negative gate count");
  const std::int64_t first = task == Task::state_prep ? 2 * n : 3 * n;
  return first + 2 * std::int64_t{m} * N;
}

std::int64_t target_params(Task task, int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("bounds: qubit count out of range");
  const std::int64_t dim = std::int64_t{1} << n;
  return task == Task::state_prep ? 2 * dim - 2 : dim * dim - 1;
}

int lower_bound(Task task, int n, int m) {
  check(n, m);
  const std::int64_t dim = std::int64_t{1} << n;
  if (task == Task::state_prep) return static_cast<int>(ceil_div(dim - 1 - n, m));
  return static_cast<int>(ceil_div(dim * dim - 1 - 3 * std::int64_t{n}, 2 * std::int64_t{m}));
}

}  // namespace qsynth
