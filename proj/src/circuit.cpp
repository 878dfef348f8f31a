#include "qsynth/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

#include "qsynth/targets.hpp"

namespace qsynth {

namespace {

void subsets(int n, int m, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == m) {
    out.push_back(cur);
    return;
  }
  for (int q = start; q < n; ++q) {
    cur.push_back(q);
    subsets(n, m, q + 1, cur, out);
    cur.pop_back();
  }
}

void validate_gate(const GateConfiguration& config, const std::vector<int>& gate) {
  const std::size_t want = config.kind == EntanglerKind::controlled_u ? 2 : config.m;
  if (gate.size() != want) throw std::invalid_argument("gate has the wrong number of qubits");
  for (std::size_t i = 0; i < gate.size(); ++i) {
    if (gate[i] < 0 || gate[i] >= config.n) throw std::out_of_range("gate qubit out of range");
    for (std::size_t k = 0; k < i; ++k)
      if (gate[k] == gate[i]) throw std::invalid_argument("gate repeats a qubit");
  }
}

}  // namespace

ConfigSpace::ConfigSpace(int n, int m, EntanglerKind kind) : n_(n), m_(m), kind_(kind) {
  if (n < 2 || n > kMaxQubits) throw std::invalid_argument("ConfigSpace: qubit count out of range");
  if (kind == EntanglerKind::controlled_u) {
    m_ = 2;
    for (int c = 0; c < n; ++c)
      for (int t = 0; t < n; ++t)
        if (c != t) choices_.push_back({c, t});
  } else {
    if (m < 2 || m > n) throw std::invalid_argument("ConfigSpace: need 2 <= m <= n");
    std::vector<int> cur;
    subsets(n, m, 0, cur, choices_);
  }
}

std::uint64_t ConfigSpace::size(int N, std::uint64_t cap) const {
  if (N < 0) throw std::invalid_argument("ConfigSpace: negative gate count");
  std::uint64_t total = 1;
  for (int i = 0; i < N; ++i) {
    if (total > cap / choice_count()) {
      throw std::overflow_error("configuration space exceeds the configured cap");
    }
    total *= choice_count();
  }
  if (total > cap) throw std::overflow_error("configuration space exceeds the configured cap");
  return total;
}

GateConfiguration ConfigSpace::decode(std::uint64_t id, int N) const {
  GateConfiguration config{n_, m_, kind_, {}};
  config.gates.reserve(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    config.gates.push_back(choices_[id % choice_count()]);
    id /= choice_count();
  }
  if (id != 0) throw std::out_of_range("configuration id out of range");
  return config;
}

std::size_t ConfigSpace::choice_index(const std::vector<int>& gate) const {
  const auto it = std::find(choices_.begin(), choices_.end(), gate);
  if (it == choices_.end()) throw std::invalid_argument("gate is not a valid choice in this space");
  return static_cast<std::size_t>(it - choices_.begin());
}

std::uint64_t ConfigSpace::encode(const GateConfiguration& config) const {
  if (config.n != n_ || config.kind != kind_ || config.m != m_) {
    throw std::invalid_argument("configuration does not belong to this space");
  }
  std::uint64_t id = 0;
  for (int j = config.size() - 1; j >= 0; --j) {
    id = id * choice_count() + choice_index(config.gates[static_cast<std::size_t>(j)]);
  }
  return id;
}

std::string to_text(const GateConfiguration& config) {
  std::string out = std::to_string(config.size()) + "@" +
                    (config.kind == EntanglerKind::controlled_u ? std::string("cu")
                                                                : std::to_string(config.m)) +
                    ":";
  if (!config.gates.empty()) out += ' ';
  for (const auto& gate : config.gates) {
    out += '(';
    for (std::size_t i = 0; i < gate.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(gate[i]);
    }
    out += ')';
  }
  return out;
}

GateConfiguration parse_config(std::string_view text, int n) {
  const auto fail = [&](const char* why) {
    throw std::invalid_argument(std::string("parse_config: ") + why + ": '" + std::string(text) + "'");
  };
  const auto at = text.find('@');
  const auto colon = text.find(':');
  if (at == std::string_view::npos || colon == std::string_view::npos || colon < at) {
    fail("expected 'N@m: (..)(..)'");
  }
  int N = 0;
  if (std::from_chars(text.data(), text.data() + at, N).ec != std::errc{}) fail("bad gate count");

  GateConfiguration config;
  config.n = n;
  const std::string_view arity = text.substr(at + 1, colon - at - 1);
  if (arity == "cu") {
    config.kind = EntanglerKind::controlled_u;
    config.m = 2;
  } else if (std::from_chars(arity.data(), arity.data() + arity.size(), config.m).ec != std::errc{}) {
    fail("bad arity");
  }

  std::size_t pos = colon + 1;
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    if (text[pos] != '(') fail("expected '('");
    const auto close = text.find(')', pos);
    if (close == std::string_view::npos) fail("unbalanced '('");
    std::vector<int> gate;
    std::size_t p = pos + 1;
    while (p < close) {
      int q = 0;
      const auto r = std::from_chars(text.data() + p, text.data() + close, q);
      if (r.ec != std::errc{}) fail("bad qubit index");
      gate.push_back(q);
      p = static_cast<std::size_t>(r.ptr - text.data());
      if (p < close && text[p] == ',') ++p;
    }
    if (config.kind == EntanglerKind::cz) std::sort(gate.begin(), gate.end());
    validate_gate(config, gate);
    config.gates.push_back(std::move(gate));
    pos = close + 1;
  }
  if (config.size() != N) fail("gate count does not match the prefix");
  return config;
}

int depth(const GateConfiguration& config) {
  std::vector<int> layer(static_cast<std::size_t>(config.n), 0);
  int out = 0;
  for (const auto& gate : config.gates) {
    int l = 0;
    for (int q : gate) l = std::max(l, layer[static_cast<std::size_t>(q)]);
    ++l;
    for (int q : gate) layer[static_cast<std::size_t>(q)] = l;
    out = std::max(out, l);
  }
  return out;
}

GateConfiguration permute(const GateConfiguration& config, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != config.n) throw std::invalid_argument("permute: wrong size");
  std::vector<int> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < config.n; ++i)
    if (sorted[static_cast<std::size_t>(i)] != i) throw std::invalid_argument("permute: not a bijection");

  GateConfiguration out = config;
  for (auto& gate : out.gates) {
    for (int& q : gate) q = perm[static_cast<std::size_t>(q)];
    if (out.kind == EntanglerKind::cz) std::sort(gate.begin(), gate.end());
  }
  return out;
}

GateConfiguration reverse(const GateConfiguration& config) {
  GateConfiguration out = config;
  std::reverse(out.gates.begin(), out.gates.end());
  return out;
}

std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::size_t ParamCircuit::rotation_count(const GateConfiguration& config) {
  const std::size_t per_gate =
      static_cast<std::size_t>(config.m) + (config.kind == EntanglerKind::controlled_u ? 1 : 0);
  return static_cast<std::size_t>(config.n) + per_gate * config.gates.size();
}

std::size_t ParamCircuit::gate_offset(const GateConfiguration& config, int j) {
  const std::size_t per_gate =
      static_cast<std::size_t>(config.m) + (config.kind == EntanglerKind::controlled_u ? 1 : 0);
  return static_cast<std::size_t>(config.n) + per_gate * static_cast<std::size_t>(j);
}

ParamCircuit ParamCircuit::identity(GateConfiguration config) {
  const std::size_t count = rotation_count(config);
  return ParamCircuit{std::move(config), std::vector<Su2>(count)};
}

std::vector<CircuitOp> lower(const GateConfiguration& config) {
  std::vector<CircuitOp> ops;
  std::size_t rot = 0;
  for (int q = 0; q < config.n; ++q) {
    ops.push_back({CircuitOp::Kind::rotation, q, 0, 0, rot++});
  }
  for (const auto& gate : config.gates) {
    if (config.kind == EntanglerKind::controlled_u) {
      ops.push_back({CircuitOp::Kind::controlled, gate[1], gate[0], 0, rot++});
    } else {
      std::size_t mask = 0;
      for (int q : gate) mask |= qubit_bit(q, config.n);
      ops.push_back({CircuitOp::Kind::phase_flip, 0, 0, mask, 0});
    }
    for (int q : gate) ops.push_back({CircuitOp::Kind::rotation, q, 0, 0, rot++});
  }
  return ops;
}

Matrix compose(const ParamCircuit& circuit) {
  const auto& config = circuit.config;
  const int n = config.n;
  if (circuit.rotations.size() != ParamCircuit::rotation_count(config)) {
    throw std::invalid_argument("compose: rotation count does not match the configuration");
  }
  const std::size_t dim = std::size_t{1} << n;
  Matrix proj0(2, 2);
  Matrix proj1(2, 2);
  proj0(0, 0) = 1.0;
  proj1(1, 1) = 1.0;

  Matrix total = Matrix::identity(dim);
  for (const auto& op : lower(config)) {
    Matrix step;
    switch (op.kind) {
      case CircuitOp::Kind::rotation:
        step = embed_single(circuit.rotations[op.rotation], op.qubit, n);
        break;
      case CircuitOp::Kind::phase_flip: {
        std::vector<int> qubits;
        for (int q = 0; q < n; ++q)
          if (op.mask & qubit_bit(q, n)) qubits.push_back(q);
        step = multi_cz(n, qubits);
        break;
      }
      case CircuitOp::Kind::controlled:
        step = embed_single(proj0, op.control, n) +
               embed_single(proj1, op.control, n) *
                   embed_single(circuit.rotations[op.rotation], op.qubit, n);
        break;
    }
    total = step * total;
  }
  return total;
}

StateVector apply_to_state(const ParamCircuit& circuit, const StateVector& psi0) {
  const auto& config = circuit.config;
  if (psi0.dim() != (std::size_t{1} << config.n)) {
    throw std::invalid_argument("apply_to_state: dimension mismatch");
  }
  StateVector psi = psi0;
  for (const auto& op : lower(config)) {
    switch (op.kind) {
      case CircuitOp::Kind::rotation:
        apply_single(psi.data(), 1, config.n, op.qubit, circuit.rotations[op.rotation]);
        break;
      case CircuitOp::Kind::phase_flip:
        apply_phase_flip(psi.data(), 1, op.mask);
        break;
      case CircuitOp::Kind::controlled:
        apply_controlled(psi.data(), 1, config.n, op.control, op.qubit,
                         circuit.rotations[op.rotation]);
        break;
    }
  }
  return psi;
}

}  // namespace qsynth
