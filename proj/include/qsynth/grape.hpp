#pragma once

// Gradient ascent over the single-qubit rotations of a fixed gate configuration.
//
// Each iteration imagines an extra rotation exp(-i(dx sx + dy sy + dz sz))
// inserted right after every stored rotation, evaluates dF/d(dx,dy,dz) at zero
// from one forward and one backward sweep, and folds the resulting small
// rotation into the stored one: R <- exp(-i step*grad.sigma) R.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsynth/circuit.hpp"
#include "qsynth/rng.hpp"
#include "qsynth/targets.hpp"

namespace qsynth {

enum class Method {
  /// Fixed-direction ascent: the update angles are step_size * gradient.
  gradient,
  /// Limited-memory BFGS direction over the same insertion-point gradient,
  /// with Armijo backtracking. Converges far faster near F = 1.
  lbfgs,
};

struct OptimizerSettings {
  Method method = Method::lbfgs;
  int max_iterations = 1000;
  double step_size = 0.05;
  /// Halve the step when a trial lowers F (and reject it); grow it 1.05x otherwise.
  bool adaptive = true;
  /// Upper bound on the adaptive step, as a multiple of step_size.
  double max_step_factor = 1.0;
  double stop_infidelity = 1e-13;
  std::uint64_t seed = 0;
  int lbfgs_memory = 10;
  /// Record (iteration, best F) every this many iterations; 0 disables the trace.
  int trace_every = 0;
};

inline constexpr int kReunitarizeInterval = 10'000;

Method parse_method(const std::string& text);
std::string to_string(Method method);

struct OptResult {
  std::uint64_t config_id = 0;
  std::uint64_t seed = 0;
  double initial_fidelity = 0.0;
  double final_fidelity = 0.0;
  int iterations_used = 0;
  /// Restarts actually run (multi_restart) and their summed iterations.
  int restarts_used = 1;
  long total_iterations = 0;
  ParamCircuit circuit;
  std::vector<std::pair<int, double>> fidelity_trace;
};

/// dF/d(dx, dy, dz) at each insertion point, indexed like ParamCircuit::rotations.
using Gradient = std::vector<std::array<double, 3>>;

/// Every rotation is su2_exp(x, y, z) with x, y, z uniform on [0, 2pi).
ParamCircuit init_rotations(const GateConfiguration& config, Rng& rng);

/// Reusable forward/backward propagation workspace for one (configuration, target) pair.
class FidelityEvaluator {
 public:
  FidelityEvaluator(const GateConfiguration& config, const Target& target);

  /// Forward sweep; keeps the propagated state after every insertion point.
  double fidelity(const ParamCircuit& circuit);
  /// Backward sweep against the states of the most recent fidelity() call.
  void gradient(const ParamCircuit& circuit, Gradient& out);

  double fidelity_and_gradient(const ParamCircuit& circuit, Gradient& out) {
    const double f = fidelity(circuit);
    gradient(circuit, out);
    return f;
  }

 private:
  void check(const ParamCircuit& circuit) const;

  int n_;
  std::size_t dim_;
  std::size_t cols_;   // 1 for states, dim for operators
  double norm_;        // 1 for states, 4^n for operators
  std::vector<CircuitOp> ops_;
  std::vector<Complex> initial_;
  std::vector<Complex> target_;
  std::vector<Complex> work_;
  std::vector<Complex> lambda_;
  std::vector<std::vector<Complex>> saved_;  // forward block after each insertion point
  Complex overlap_{};
};

double fidelity(const ParamCircuit& circuit, const Target& target);
Gradient gradient(const ParamCircuit& circuit, const Target& target);

/// Optimise from random initial rotations drawn with settings.seed.
OptResult optimize(const GateConfiguration& config, const Target& target,
                   const OptimizerSettings& settings);
/// Optimise from the given rotations.
OptResult optimize_from(ParamCircuit start, const Target& target, const OptimizerSettings& settings);

/// Best of `restarts` independent optimize() runs. Restart 0 uses settings.seed,
/// restart r > 0 uses child_seed(settings.seed, r). Stops early once a run gets
/// 1 - F below `early_exit_infidelity` (if positive).
OptResult multi_restart(const GateConfiguration& config, const Target& target,
                        const OptimizerSettings& settings, int restarts,
                        double early_exit_infidelity = 0.0);

}  // namespace qsynth
