#pragma once

// Parameter-counting lower bounds on the number of m-qubit CZ gates.

#include <cstdint>
#include <string>

namespace qsynth {

enum class Task { state_prep, unitary };

Task parse_task(const std::string& text);
std::string to_string(Task task);

/// Independent parameters of a circuit with N m-qubit CZ gates on n qubits:
/// 2n + 2mN for state preparation, 3n + 2mN for unitaries.
std::int64_t circuit_params(Task task, int n, int m, int N);

/// 2 * 2^n - 2 for a state, 4^n - 1 for a unitary.
std::int64_t target_params(Task task, int n);

/// Smallest N with circuit_params >= target_params:
/// ceil((2^n - 1 - n) / m) or ceil((4^n - 1 - 3n) / 2m).
int lower_bound(Task task, int n, int m);

}  // namespace qsynth
