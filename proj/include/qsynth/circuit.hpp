#pragma once

// Gate configurations (the discrete search coordinate) and parameterised
// circuits built from them.
//
// A circuit is R_N V_N ... R_1 V_1 R_0: an initial rotation on every qubit,
// then for each entangling gate V_j one rotation on each qubit that V_j touches.
// In controlled-U mode V_j additionally carries an optimisable rotation U_j.

#include <cstdint>
#include <ranges>
#include <string>
#include <string_view>
#include <vector>

#include "qsynth/linalg.hpp"

namespace qsynth {

enum class EntanglerKind { cz, controlled_u };

inline constexpr std::uint64_t kDefaultConfigCap = 100'000'000;

struct GateConfiguration {
  int n = 0;
  /// Entangler arity; always 2 in controlled-U mode.
  int m = 2;
  EntanglerKind kind = EntanglerKind::cz;
  /// One qubit list per gate: sorted ascending for CZ, (control, target) for controlled-U.
  std::vector<std::vector<int>> gates;

  int size() const { return static_cast<int>(gates.size()); }
  bool operator==(const GateConfiguration&) const = default;
};

/// The set of gate choices for (n, m, kind) and the mixed-radix indexing of
/// configurations built from them. Gate 0 is the least significant digit.
class ConfigSpace {
 public:
  ConfigSpace(int n, int m, EntanglerKind kind = EntanglerKind::cz);

  int n() const { return n_; }
  int m() const { return m_; }
  EntanglerKind kind() const { return kind_; }

  /// Gate choices in index order: sorted m-subsets in lexicographic order, or
  /// ordered (control, target) pairs in lexicographic order.
  const std::vector<std::vector<int>>& choices() const { return choices_; }
  std::uint64_t choice_count() const { return choices_.size(); }

  /// choice_count()^N; throws std::overflow_error above `cap`.
  std::uint64_t size(int N, std::uint64_t cap = kDefaultConfigCap) const;

  GateConfiguration decode(std::uint64_t id, int N) const;
  std::uint64_t encode(const GateConfiguration& config) const;
  std::size_t choice_index(const std::vector<int>& gate) const;

 private:
  int n_;
  int m_;
  EntanglerKind kind_;
  std::vector<std::vector<int>> choices_;
};

/// Every configuration of N gates, in canonical index order.
inline auto enumerate_configs(const ConfigSpace& space, int N,
                              std::uint64_t cap = kDefaultConfigCap) {
  return std::views::iota(std::uint64_t{0}, space.size(N, cap)) |
         std::views::transform([space, N](std::uint64_t id) { return space.decode(id, N); });
}

/// Configuration text form, e.g. "6@2: (0,1)(0,2)(1,3)(0,1)(0,1)(2,3)" or "5@cu: (1,2)(0,1)...".
std::string to_text(const GateConfiguration& config);
GateConfiguration parse_config(std::string_view text, int n);

int depth(const GateConfiguration& config);
/// Relabel qubit q as perm[q] and re-canonicalise.
GateConfiguration permute(const GateConfiguration& config, const std::vector<int>& perm);
GateConfiguration reverse(const GateConfiguration& config);

/// All n! permutations of 0..n-1 in lexicographic order.
std::vector<std::vector<int>> all_permutations(int n);

struct ParamCircuit {
  GateConfiguration config;
  /// Circuit (time) order: initial layer on qubits 0..n-1, then for each gate
  /// [U_j in controlled-U mode] followed by one rotation per gate qubit.
  std::vector<Su2> rotations;

  static std::size_t rotation_count(const GateConfiguration& config);
  /// Offset of gate j's first rotation in `rotations`.
  static std::size_t gate_offset(const GateConfiguration& config, int j);

  /// All rotations set to the identity.
  static ParamCircuit identity(GateConfiguration config);
};

/// A circuit flattened into elementary in-place operations. Every op that owns
/// a rotation marks a gradient insertion point immediately after it.
struct CircuitOp {
  enum class Kind { rotation, phase_flip, controlled };
  Kind kind;
  int qubit = 0;    // rotation qubit, or controlled-U target
  int control = 0;  // controlled-U control
  std::size_t mask = 0;      // phase_flip row mask
  std::size_t rotation = 0;  // index into ParamCircuit::rotations
};

std::vector<CircuitOp> lower(const GateConfiguration& config);

/// Dense product of the full embedded gate matrices.
Matrix compose(const ParamCircuit& circuit);
/// Sequential in-place vector updates; never forms the 2^n x 2^n operator.
StateVector apply_to_state(const ParamCircuit& circuit, const StateVector& psi0);

}  // namespace qsynth
