#pragma once

// Target states and operators: random generation with bias reduction, named
// gates (multi-qubit CZ, Toffoli), fidelity functionals and the target file format.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qsynth/linalg.hpp"
#include "qsynth/rng.hpp"

namespace qsynth {

enum class TargetKind { state, unitary };

/// A resolved target: either a state (prepared from |0...0>) or an operator.
struct Target {
  TargetKind kind = TargetKind::state;
  int n = 0;
  StateVector state;  // kind == state
  Matrix unitary;     // kind == unitary
};

/// How a target is obtained; the serialisable form stored in run manifests.
///   random-state / random-unitary  (seed)
///   toffoli3, toffoli4, toffoli:<n>, ccz:<n>
///   file:<path>
struct TargetSpec {
  std::string source = "random-state";
  int n = 0;
  std::uint64_t seed = 0;
};

inline constexpr int kDebiasFactors = 10;

/// Random complex vector (real and imaginary parts uniform on [-1, 1]), normalised.
StateVector raw_random_state(int n, Rng& rng);
/// Column-wise Gram-Schmidt of random vectors, followed by a random column shuffle.
Matrix raw_random_unitary(int n, Rng& rng);

/// raw_random_state followed by debias().
StateVector random_state(int n, Rng& rng);
/// raw_random_unitary followed by debias().
Matrix random_unitary(int n, Rng& rng);

/// Left-multiply by a product of kDebiasFactors independent raw random unitaries.
Target debias(Target target, Rng& rng);

Matrix multi_cz(int n, const std::vector<int>& qubits);
/// Qubits 0..n-2 control, qubit n-1 is the target.
Matrix toffoli(int n);

double state_fidelity(const StateVector& psi, const StateVector& target);
double unitary_fidelity(const Matrix& u, const Matrix& target);

Target make_target(const TargetSpec& spec);
bool is_self_inverse(const Target& target, double tol = 1e-10);
std::string to_string(TargetKind kind);

void write_target_file(const std::filesystem::path& path, const Target& target);
Target read_target_file(const std::filesystem::path& path);

}  // namespace qsynth
