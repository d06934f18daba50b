#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsl/model.hpp"
#include "qsl/propagator.hpp"

namespace qsl {

/// The four uniform initial-pulse distributions: width 1 or 10, either centered
/// on zero or starting at zero.
enum class InitDistribution { Width1Centered = 0, Width1FromZero = 1, Width10Centered = 2, Width10FromZero = 3 };

enum class GradientMode {
  FirstOrder,  // -(2/d^2) Re[i dt Tr{P_j^dag H_k X_j} Tr{X_j^dag P_j}]
  Exact,       // exact derivative of each step exponential
};

enum class UpdateRule { Steepest, Lbfgs };

struct StepRule {
  double initial_step = 0.05;  // largest single-amplitude change of the first trial
  double backtrack = 0.5;
  double growth = 1.5;
};

struct OptimizerConfig {
  int iterations = 10000;
  StepRule step_rule;
  std::uint64_t seed = 1;
  InitDistribution init_distribution = InitDistribution::Width1Centered;
  int record_every = 1;
  GradientMode gradient = GradientMode::FirstOrder;
  UpdateRule update = UpdateRule::Steepest;
  int lbfgs_memory = 10;
  /// Stop once the fidelity reaches this value (1 disables early exit).
  double stop_fidelity = 1.0;
  /// Stop after this many consecutive line searches that found no ascent.
  int max_stalls = 3;
  bool log_objective = false;  // ascend log F instead of F
};

/// How the number of time steps is chosen for a total pulse time.
struct StepCountRule {
  /// Non-positive: reference rule (see reference_step_count). Positive: the
  /// smallest N with T / N <= max_dt.
  double max_dt = 0.0;
  int min_steps = 1;

  int steps_for(double total_time) const;
};

struct OptimizationResult {
  double best_fidelity = 0.0;
  PulseSet best_pulses;
  std::vector<double> fidelity_history;  // every record_every iterations, plus the last
  int iterations_used = 0;
};

/// |Tr{target^dag final_op} / 4|^2. `final_op` is either the full operator or
/// its restriction to the four qubit columns.
double fidelity(const CMatrix& final_op, const GateTarget& target);

/// Target restricted to its qubit columns (dim x 4).
CMatrix target_columns(const GateTarget& target);

/// Qubit-column identity (dim x 4) used to start forward chains.
CMatrix qubit_columns(const GateTarget& target, int dim);

/// Fidelity of the lossy propagation of `pulses`.
double pulse_fidelity(const Dynamics& dyn, const PulseSet& pulses, const GateTarget& target);

/// dF/du_k(j) as a channels x steps array.
RMatrix gradient(const Dynamics& dyn, const PulseSet& pulses, const GateTarget& target,
                 GradientMode mode = GradientMode::FirstOrder);

/// Uniform random amplitudes, reproducible for a given seed.
PulseSet init_pulses(const OptimizerConfig& config, int n_steps, double dt, int channels = 2);

/// Resample a pulse onto a longer grid: amplitudes follow the old pulse in
/// time and are zero past its end.
PulseSet pad_pulses(const PulseSet& shorter, int n_steps, double dt);

/// Gradient ascent from a random start. Throws NumericalError on non-finite
/// fidelity.
OptimizationResult optimize(const CoupledSystem& sys, const LossSpec& loss,
                            const GateTarget& target, double total_time,
                            const OptimizerConfig& config, const StepCountRule& steps = {});

/// Same, from given initial pulses (their dt and step count are used).
OptimizationResult optimize_from(const Dynamics& dyn, const GateTarget& target,
                                 PulseSet initial, const OptimizerConfig& config);

struct SweepRun {
  double t_over_t0 = 0.0;
  int restart_id = 0;
  std::uint64_t seed = 0;
  InitDistribution distribution = InitDistribution::Width1Centered;
  bool warm_started = false;
  double fidelity = 0.0;
  int iterations = 0;
  double wall_seconds = 0.0;
  int n_steps = 0;
  double dt = 0.0;
};

struct SweepPoint {
  double t_over_t0 = 0.0;
  double best_fidelity = 0.0;
  PulseSet best_pulses;
};

struct SweepResult {
  std::vector<SweepPoint> curve;  // in T_list order
  std::vector<SweepRun> runs;     // (T, restart) order
};

struct SweepOptions {
  int restarts = 4;
  /// Extra restart per T seeded with the padded winner of the next shorter T.
  bool warm_start = true;
  int workers = 1;
};

/// Seed of restart r at sweep point i; independent of scheduling.
std::uint64_t sweep_seed(std::uint64_t base, std::size_t point, int restart);

/// Independent optimizations per (T, restart). T values are in units of T0.
/// Restart r uses distribution r mod 4.
SweepResult sweep_gate_time(const CoupledSystem& sys, const LossSpec& loss,
                            const GateTarget& target, const std::vector<double>& t_over_t0,
                            const OptimizerConfig& config, const StepCountRule& steps,
                            const SweepOptions& options);

const char* to_string(InitDistribution d);
std::optional<InitDistribution> parse_distribution(const std::string& name);

}  // namespace qsl
