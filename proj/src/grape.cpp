#include "qsynth/grape.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace qsynth {

namespace {

constexpr double kMinStep = 1e-14;

bool has_rotation(const CircuitOp& op) { return op.kind != CircuitOp::Kind::phase_flip; }

}  // namespace

ParamCircuit init_rotations(const GateConfiguration& config, Rng& rng) {
  ParamCircuit pc = ParamCircuit::identity(config);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (auto& r : pc.rotations) {
    const double x = rng.uniform(0.0, two_pi);
    const double y = rng.uniform(0.0, two_pi);
    const double z = rng.uniform(0.0, two_pi);
    r = su2_exp(x, y, z);
  }
  return pc;
}

FidelityEvaluator::FidelityEvaluator(const GateConfiguration& config, const Target& target)
    : n_(config.n), dim_(std::size_t{1} << config.n), ops_(lower(config)) {
  if (target.n != config.n) throw std::invalid_argument("FidelityEvaluator: qubit count mismatch");
  if (target.kind == TargetKind::state) {
    cols_ = 1;
    norm_ = 1.0;
    const StateVector zero = StateVector::zero(n_);
    initial_.assign(zero.data().begin(), zero.data().end());
    target_.assign(target.state.data().begin(), target.state.data().end());
  } else {
    cols_ = dim_;
    norm_ = static_cast<double>(dim_ * dim_);
    const Matrix id = Matrix::identity(dim_);
    initial_.assign(id.data().begin(), id.data().end());
    target_.assign(target.unitary.data().begin(), target.unitary.data().end());
  }
  saved_.assign(ParamCircuit::rotation_count(config), std::vector<Complex>(dim_ * cols_));
  work_.resize(dim_ * cols_);
  lambda_.resize(dim_ * cols_);
}

void FidelityEvaluator::check(const ParamCircuit& circuit) const {
  if (circuit.config.n != n_ || circuit.rotations.size() != saved_.size()) {
    throw std::invalid_argument("FidelityEvaluator: circuit does not match the configuration");
  }
}

double FidelityEvaluator::fidelity(const ParamCircuit& circuit) {
  check(circuit);
  std::copy(initial_.begin(), initial_.end(), work_.begin());
  for (const auto& op : ops_) {
    switch (op.kind) {
      case CircuitOp::Kind::rotation:
        apply_single(work_, cols_, n_, op.qubit, circuit.rotations[op.rotation]);
        break;
      case CircuitOp::Kind::phase_flip:
        apply_phase_flip(work_, cols_, op.mask);
        break;
      case CircuitOp::Kind::controlled:
        apply_controlled(work_, cols_, n_, op.control, op.qubit, circuit.rotations[op.rotation]);
        break;
    }
    if (has_rotation(op)) std::copy(work_.begin(), work_.end(), saved_[op.rotation].begin());
  }
  Complex acc{};
  for (std::size_t i = 0; i < work_.size(); ++i) acc += std::conj(target_[i]) * work_[i];
  overlap_ = acc;
  return std::norm(acc) / norm_;
}

void FidelityEvaluator::gradient(const ParamCircuit& circuit, Gradient& out) {
  check(circuit);
  out.assign(saved_.size(), {0.0, 0.0, 0.0});
  std::copy(target_.begin(), target_.end(), lambda_.begin());
  const Complex overlap_conj = std::conj(overlap_);
  const double scale = 2.0 / norm_;

  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    const CircuitOp& op = *it;
    if (has_rotation(op)) {
      // t_a = <lambda| sigma_a |psi> restricted to the insertion qubit (and to
      // control = 1 for a controlled-U insertion).
      const std::vector<Complex>& psi = saved_[op.rotation];
      const std::size_t bit = qubit_bit(op.qubit, n_);
      const std::size_t cbit = op.kind == CircuitOp::Kind::controlled ? qubit_bit(op.control, n_) : 0;
      Complex tx{}, ty{}, tz{};
      for (std::size_t r0 = 0; r0 < dim_; ++r0) {
        if ((r0 & bit) || (r0 & cbit) != cbit) continue;
        const Complex* a = psi.data() + r0 * cols_;
        const Complex* b = psi.data() + (r0 | bit) * cols_;
        const Complex* l0 = lambda_.data() + r0 * cols_;
        const Complex* l1 = lambda_.data() + (r0 | bit) * cols_;
        Complex sx{}, sy{}, sz{};
        for (std::size_t c = 0; c < cols_; ++c) {
          const Complex p0 = std::conj(l0[c]);
          const Complex p1 = std::conj(l1[c]);
          const Complex p0b = p0 * b[c];
          const Complex p1a = p1 * a[c];
          sx += p0b + p1a;
          sy += p1a - p0b;  // times i below
          sz += p0 * a[c] - p1 * b[c];
        }
        tx += sx;
        ty += Complex{-sy.imag(), sy.real()};
        tz += sz;
      }
      auto& g = out[op.rotation];
      g[0] = scale * (tx * overlap_conj).imag();
      g[1] = scale * (ty * overlap_conj).imag();
      g[2] = scale * (tz * overlap_conj).imag();
    }
    switch (op.kind) {
      case CircuitOp::Kind::rotation:
        apply_single(lambda_, cols_, n_, op.qubit, circuit.rotations[op.rotation].adjoint());
        break;
      case CircuitOp::Kind::phase_flip:
        apply_phase_flip(lambda_, cols_, op.mask);
        break;
      case CircuitOp::Kind::controlled:
        apply_controlled(lambda_, cols_, n_, op.control, op.qubit,
                         circuit.rotations[op.rotation].adjoint());
        break;
    }
  }
}

double fidelity(const ParamCircuit& circuit, const Target& target) {
  FidelityEvaluator eval(circuit.config, target);
  return eval.fidelity(circuit);
}

Gradient gradient(const ParamCircuit& circuit, const Target& target) {
  FidelityEvaluator eval(circuit.config, target);
  Gradient g;
  eval.fidelity_and_gradient(circuit, g);
  return g;
}

namespace {

void apply_update(const ParamCircuit& from, const std::vector<double>& angles, double scale,
                  ParamCircuit& to) {
  for (std::size_t r = 0; r < from.rotations.size(); ++r) {
    to.rotations[r] = su2_exp(scale * angles[3 * r], scale * angles[3 * r + 1],
                              scale * angles[3 * r + 2]) *
                      from.rotations[r];
  }
}

void flatten(const Gradient& g, std::vector<double>& out) {
  out.resize(3 * g.size());
  for (std::size_t r = 0; r < g.size(); ++r)
    for (int a = 0; a < 3; ++a) out[3 * r + static_cast<std::size_t>(a)] = g[r][static_cast<std::size_t>(a)];
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Shared loop bookkeeping: iteration count, re-unitarisation and trace.
struct Progress {
  const OptimizerSettings& settings;
  OptResult& result;
  int it = 0;
  int updates = 0;

  bool running(double best_f) const {
    return it < settings.max_iterations && 1.0 - best_f > settings.stop_infidelity;
  }
  void count_update(ParamCircuit& pc) {
    if (++updates % kReunitarizeInterval == 0)
      for (auto& rot : pc.rotations) rot.reunitarize();
  }
  void tick(double best_f) {
    ++it;
    if (settings.trace_every > 0 && it % settings.trace_every == 0) {
      result.fidelity_trace.emplace_back(it, best_f);
    }
  }
};

double ascend_gradient(FidelityEvaluator& eval, ParamCircuit& current, double f, Gradient& grad,
                       Progress& progress) {
  const OptimizerSettings& settings = progress.settings;
  ParamCircuit trial = current;
  // Non-adaptive runs accept every step, so the best point is tracked separately.
  ParamCircuit best = current;
  double best_f = f;

  const double max_step = settings.step_size * settings.max_step_factor;
  double step = settings.step_size;
  std::vector<double> angles;
  while (progress.running(best_f)) {
    flatten(grad, angles);
    apply_update(current, angles, step, trial);
    progress.count_update(trial);
    const double ft = eval.fidelity(trial);

    if (!settings.adaptive || ft >= f) {
      std::swap(current, trial);
      f = ft;
      eval.gradient(current, grad);
      if (settings.adaptive) step = std::min(step * 1.05, max_step);
      if (f > best_f) {
        best_f = f;
        if (!settings.adaptive) best = current;
      }
      progress.tick(best_f);
    } else {
      step *= 0.5;
      progress.tick(best_f);
      if (step < kMinStep) break;
    }
  }
  if (!settings.adaptive) current = std::move(best);
  return best_f;
}

double ascend_lbfgs(FidelityEvaluator& eval, ParamCircuit& current, double f, Gradient& grad,
                    Progress& progress) {
  constexpr double kArmijo = 1e-4;
  constexpr double kMinAlpha = 1e-10;
  const OptimizerSettings& settings = progress.settings;
  const std::size_t memory = static_cast<std::size_t>(std::max(1, settings.lbfgs_memory));

  // Curvature pairs for minimising -F: s = accepted step, y = -(g_new - g_old).
  std::deque<std::vector<double>> s_hist;
  std::deque<std::vector<double>> y_hist;
  std::deque<double> rho_hist;

  ParamCircuit trial = current;
  std::vector<double> g;
  std::vector<double> g_new;
  std::vector<double> dir;
  std::vector<double> alphas;
  flatten(grad, g);
  const std::size_t k = g.size();

  while (progress.running(f)) {
    // Two-loop recursion: dir = H * g (an ascent direction).
    dir = g;
    alphas.assign(s_hist.size(), 0.0);
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alphas[i] = rho_hist[i] * dot(s_hist[i], dir);
      for (std::size_t j = 0; j < k; ++j) dir[j] -= alphas[i] * y_hist[i][j];
    }
    const double gamma = s_hist.empty()
                             ? settings.step_size
                             : dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (auto& v : dir) v *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], dir);
      for (std::size_t j = 0; j < k; ++j) dir[j] += s_hist[i][j] * (alphas[i] - beta);
    }
    double slope = dot(dir, g);
    if (!(slope > 0.0)) {
      // Lost positive definiteness; fall back to a plain gradient step.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = g;
      for (auto& v : dir) v *= settings.step_size;
      slope = dot(dir, g);
      if (!(slope > 0.0)) break;
    }

    double alpha = 1.0;
    double ft = 0.0;
    bool accepted = false;
    while (progress.running(f)) {
      apply_update(current, dir, alpha, trial);
      ft = eval.fidelity(trial);
      progress.tick(f);
      if (ft >= f + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
      if (alpha < kMinAlpha) break;
    }
    if (!accepted) break;

    progress.count_update(trial);
    eval.gradient(trial, grad);
    flatten(grad, g_new);
    std::vector<double> s(k);
    std::vector<double> y(k);
    for (std::size_t j = 0; j < k; ++j) {
      s[j] = alpha * dir[j];
      y[j] = g[j] - g_new[j];
    }
    const double sy = dot(s, y);
    if (sy > 1e-18) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    std::swap(current, trial);
    std::swap(g, g_new);
    f = ft;
  }
  return f;
}

}  // namespace

Method parse_method(const std::string& text) {
  if (text == "gradient") return Method::gradient;
  if (text == "lbfgs") return Method::lbfgs;
  throw std::invalid_argument("unknown optimiser method '" + text + "' (expected gradient or lbfgs)");
}

std::string to_string(Method method) { return method == Method::gradient ? "gradient" : "lbfgs"; }

OptResult optimize_from(ParamCircuit start, const Target& target, const OptimizerSettings& settings) {
  if (settings.step_size <= 0.0) throw std::invalid_argument("optimize: step_size must be positive");
  if (settings.max_iterations < 1) throw std::invalid_argument("optimize: max_iterations must be >= 1");

  FidelityEvaluator eval(start.config, target);
  OptResult result;
  result.seed = settings.seed;

  ParamCircuit current = std::move(start);
  Gradient grad;
  const double f0 = eval.fidelity_and_gradient(current, grad);
  result.initial_fidelity = f0;
  if (settings.trace_every > 0) result.fidelity_trace.emplace_back(0, f0);

  Progress progress{settings, result};
  const double best = settings.method == Method::gradient
                          ? ascend_gradient(eval, current, f0, grad, progress)
                          : ascend_lbfgs(eval, current, f0, grad, progress);

  result.final_fidelity = best;
  result.iterations_used = progress.it;
  result.total_iterations = progress.it;
  result.circuit = std::move(current);
  return result;
}

OptResult optimize(const GateConfiguration& config, const Target& target,
                   const OptimizerSettings& settings) {
  Rng rng(settings.seed);
  return optimize_from(init_rotations(config, rng), target, settings);
}

OptResult multi_restart(const GateConfiguration& config, const Target& target,
                        const OptimizerSettings& settings, int restarts,
                        double early_exit_infidelity) {
  if (restarts < 1) throw std::invalid_argument("multi_restart: restarts must be >= 1");
  OptResult best;
  long total = 0;
  int used = 0;
  for (int r = 0; r < restarts; ++r) {
    OptimizerSettings s = settings;
    if (r > 0) s.seed = child_seed(settings.seed, static_cast<std::uint64_t>(r));
    OptResult res = optimize(config, target, s);
    total += res.iterations_used;
    ++used;
    if (r == 0 || res.final_fidelity > best.final_fidelity) best = std::move(res);
    if (early_exit_infidelity > 0.0 && 1.0 - best.final_fidelity < early_exit_infidelity) break;
  }
  best.restarts_used = used;
  best.total_iterations = total;
  return best;
}

}  // namespace qsynth
