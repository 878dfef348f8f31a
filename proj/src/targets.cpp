#include "qsynth/targets.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace qsynth {

namespace {

constexpr double kColumnRegenThreshold = 1e-8;

void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("qubit count out of range");
}

std::vector<Complex> random_complex_vector(std::size_t dim, Rng& rng) {
  std::vector<Complex> v(dim);
  for (auto& a : v) {
    const double re = rng.uniform(-1.0, 1.0);
    const double im = rng.uniform(-1.0, 1.0);
    a = Complex{re, im};
  }
  return v;
}

int parse_suffix_int(const std::string& s, std::size_t pos) {
  std::size_t used = 0;
  const int v = std::stoi(s.substr(pos), &used);
  if (pos + used != s.size()) throw std::invalid_argument("bad target name: " + s);
  return v;
}

}  // namespace

StateVector raw_random_state(int n, Rng& rng) {
  check_qubits(n);
  StateVector psi(random_complex_vector(std::size_t{1} << n, rng));
  psi.normalize();
  return psi;
}

Matrix raw_random_unitary(int n, Rng& rng) {
  check_qubits(n);
  const std::size_t dim = std::size_t{1} << n;
  Matrix u(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    for (;;) {
      auto v = random_complex_vector(dim, rng);
      for (std::size_t prev = 0; prev < col; ++prev) {
        Complex proj{};
        for (std::size_t r = 0; r < dim; ++r) proj += std::conj(u(r, prev)) * v[r];
        for (std::size_t r = 0; r < dim; ++r) v[r] -= proj * u(r, prev);
      }
      double nrm = 0.0;
      for (const auto& a : v) nrm += std::norm(a);
      nrm = std::sqrt(nrm);
      if (nrm < kColumnRegenThreshold) continue;
      for (std::size_t r = 0; r < dim; ++r) u(r, col) = v[r] / nrm;
      break;
    }
  }
  // Fisher-Yates shuffle of the columns.
  std::vector<std::size_t> order(dim);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = dim - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  Matrix shuffled(dim, dim);
  for (std::size_t c = 0; c < dim; ++c)
    for (std::size_t r = 0; r < dim; ++r) shuffled(r, c) = u(r, order[c]);
  return shuffled;
}

Target debias(Target target, Rng& rng) {
  const std::size_t dim = std::size_t{1} << target.n;
  Matrix product = Matrix::identity(dim);
  for (int i = 0; i < kDebiasFactors; ++i) product = raw_random_unitary(target.n, rng) * product;
  if (target.kind == TargetKind::state) {
    target.state = product * target.state;
  } else {
    target.unitary = product * target.unitary;
  }
  return target;
}

StateVector random_state(int n, Rng& rng) {
  Target t{TargetKind::state, n, raw_random_state(n, rng), {}};
  return debias(std::move(t), rng).state;
}

Matrix random_unitary(int n, Rng& rng) {
  Target t{TargetKind::unitary, n, {}, raw_random_unitary(n, rng)};
  return debias(std::move(t), rng).unitary;
}

Matrix multi_cz(int n, const std::vector<int>& qubits) {
  check_qubits(n);
  if (qubits.size() < 2) throw std::invalid_argument("multi_cz: need at least two qubits");
  std::size_t mask = 0;
  for (int q : qubits) {
    if (q < 0 || q >= n) throw std::out_of_range("multi_cz: qubit index out of range");
    const std::size_t bit = qubit_bit(q, n);
    if (mask & bit) throw std::invalid_argument("multi_cz: repeated qubit");
    mask |= bit;
  }
  const std::size_t dim = std::size_t{1} << n;
  Matrix out(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) out(i, i) = (i & mask) == mask ? -1.0 : 1.0;
  return out;
}

Matrix toffoli(int n) {
  if (n < 3) throw std::invalid_argument("toffoli: need at least three qubits");
  check_qubits(n);
  const std::size_t dim = std::size_t{1} << n;
  Matrix out = Matrix::identity(dim);
  out(dim - 2, dim - 2) = 0.0;
  out(dim - 1, dim - 1) = 0.0;
  out(dim - 2, dim - 1) = 1.0;
  out(dim - 1, dim - 2) = 1.0;
  return out;
}

double state_fidelity(const StateVector& psi, const StateVector& target) {
  if (psi.dim() != target.dim()) throw std::invalid_argument("state_fidelity: dimension mismatch");
  return std::norm(inner(target, psi));
}

double unitary_fidelity(const Matrix& u, const Matrix& target) {
  if (u.rows() != target.rows() || u.cols() != target.cols()) {
    throw std::invalid_argument("unitary_fidelity: dimension mismatch");
  }
  return std::norm(trace_inner(target, u) / static_cast<double>(u.rows()));
}

Target make_target(const TargetSpec& spec) {
  const std::string& src = spec.source;
  if (src == "random-state" || src == "random-unitary") {
    check_qubits(spec.n);
    Rng rng(spec.seed);
    Target t;
    t.n = spec.n;
    if (src == "random-state") {
      t.kind = TargetKind::state;
      t.state = random_state(spec.n, rng);
    } else {
      t.kind = TargetKind::unitary;
      t.unitary = random_unitary(spec.n, rng);
    }
    return t;
  }
  if (src.rfind("toffoli", 0) == 0) {
    int n = 0;
    if (src.size() > 7 && src[7] == ':') {
      n = parse_suffix_int(src, 8);
    } else if (src.size() > 7) {
      n = parse_suffix_int(src, 7);
    } else {
      n = spec.n;
    }
    if (spec.n != 0 && spec.n != n) throw std::invalid_argument("target qubit count mismatch");
    return Target{TargetKind::unitary, n, {}, toffoli(n)};
  }
  if (src.rfind("ccz:", 0) == 0) {
    const int n = parse_suffix_int(src, 4);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    return Target{TargetKind::unitary, n, {}, multi_cz(n, all)};
  }
  if (src.rfind("file:", 0) == 0) {
    Target t = read_target_file(src.substr(5));
    if (spec.n != 0 && spec.n != t.n) throw std::invalid_argument("target qubit count mismatch");
    return t;
  }
  throw std::invalid_argument("unknown target source: " + src);
}

bool is_self_inverse(const Target& target, double tol) {
  if (target.kind != TargetKind::unitary) return false;
  return max_abs_diff(target.unitary * target.unitary,
                      Matrix::identity(target.unitary.rows())) < tol;
}

std::string to_string(TargetKind kind) { return kind == TargetKind::state ? "state" : "unitary"; }

void write_target_file(const std::filesystem::path& path, const Target& target) {
  nlohmann::json j;
  j["n"] = target.n;
  j["kind"] = to_string(target.kind);
  auto data = nlohmann::json::array();
  const auto values = target.kind == TargetKind::state ? target.state.data() : target.unitary.data();
  for (const auto& v : values) data.push_back({v.real(), v.imag()});
  j["data"] = std::move(data);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write target file " + path.string());
  out << j.dump() << '\n';
}

Target read_target_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read target file " + path.string());
  const auto j = nlohmann::json::parse(in);
  Target t;
  t.n = j.at("n").get<int>();
  check_qubits(t.n);
  const std::size_t dim = std::size_t{1} << t.n;
  const std::string kind = j.value("kind", "");
  const auto& data = j.at("data");
  std::vector<Complex> values;
  values.reserve(data.size());
  for (const auto& pair : data) values.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());

  if (kind == "state" || (kind.empty() && values.size() == dim)) {
    if (values.size() != dim) throw std::runtime_error("target file: wrong state length");
    t.kind = TargetKind::state;
    t.state = StateVector(std::move(values));
    if (std::abs(t.state.norm() - 1.0) > 1e-12) throw std::runtime_error("target file: state not normalised");
  } else {
    if (values.size() != dim * dim) throw std::runtime_error("target file: wrong matrix size");
    t.kind = TargetKind::unitary;
    t.unitary = Matrix(dim, dim);
    std::copy(values.begin(), values.end(), t.unitary.data().begin());
    if (unitarity_defect(t.unitary) > 1e-12) throw std::runtime_error("target file: matrix not unitary");
  }
  return t;
}

}  // namespace qsynth
