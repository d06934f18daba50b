#pragma once

#include <array>
#include <span>
#include <vector>

#include "qsl/model.hpp"
#include "qsl/numerics.hpp"

namespace qsl {

/// Piecewise-constant control amplitudes: `amplitudes(k, j)` is channel k during
/// step j. Duration of every step is `dt`.
struct PulseSet {
  double dt = 0.0;
  RMatrix amplitudes;  // channels x steps

  int n_steps() const { return static_cast<int>(amplitudes.cols()); }
  int channels() const { return static_cast<int>(amplitudes.rows()); }
  double duration() const { return dt * n_steps(); }
  /// Start time of step j.
  double time(int j) const { return dt * j; }
};

/// Static and control generators for one system plus a per-step loss factor.
/// All generators are real symmetric, which the fast paths rely on.
struct Dynamics {
  RMatrix h0;
  std::array<RMatrix, 2> controls;
  RVector loss;  // diagonal of L = exp(-Gamma dt); empty means L = I

  int dim() const { return static_cast<int>(h0.rows()); }
  bool lossless() const;

  static Dynamics build(const CoupledSystem& sys, const LossSpec& loss, double dt);
  static Dynamics build(const CoupledSystem& sys);
};

struct Trajectory {
  std::vector<double> times;   // n_steps + 1 entries, starting at 0
  std::vector<CVector> states;
};

struct PopulationSeries {
  std::vector<double> qubit;       // both qudits in {0, 1}
  std::vector<double> second;      // some qudit in |2>, none higher
  std::vector<double> upper;       // some qudit in |3> or higher
};

/// U_j = exp(-i dt (H0 + sum_k u_k H_k)).
CMatrix step_unitary(const CMatrix& h0, std::span<const CMatrix> controls,
                     std::span<const double> u, double dt);

/// Spectral factors of every step of `pulses`.
std::vector<SpectralExp> factor_steps(const Dynamics& dyn, const PulseSet& pulses);

/// X_j = L U_j ... L U_1 applied to `initial` (identity gives the operators
/// themselves). Entry j - 1 holds X_j.
std::vector<CMatrix> forward_chain(const Dynamics& dyn, std::span<const SpectralExp> steps,
                                   const CMatrix& initial);
std::vector<CMatrix> forward_chain(const Dynamics& dyn, const PulseSet& pulses);

/// P_j = U_{j+1}^dag L ... U_N^dag L target for j = 1..N (entry j - 1), so that
/// P_N = target and P_j = U_{j+1}^dag L P_{j+1}.
std::vector<CMatrix> backward_chain(const Dynamics& dyn, std::span<const SpectralExp> steps,
                                    const CMatrix& target);
std::vector<CMatrix> backward_chain(const Dynamics& dyn, const PulseSet& pulses,
                                    const GateTarget& target);

/// Final lossy operator L U_N ... L U_1 restricted to the given columns.
CMatrix final_operator(const Dynamics& dyn, std::span<const SpectralExp> steps,
                       const CMatrix& initial);

/// psi_j = X_j psi_0 at every step; norm must be 1 on input.
Trajectory evolve_state(const Dynamics& dyn, const PulseSet& pulses, const CVector& psi0);

PopulationSeries subspace_populations(const Trajectory& traj, int levels1, int levels2);

/// Step count for a total time T (internal units): 10^3 up to 50 reference
/// periods, 10^4 up to 400, 2 x 10^4 beyond.
int reference_step_count(double total_time);

}  // namespace qsl
