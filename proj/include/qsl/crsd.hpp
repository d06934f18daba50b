#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qsl/grape.hpp"
#include "qsl/model.hpp"
#include "qsl/propagator.hpp"

namespace qsl {

/// Bare-state label (j1, j2).
using StateLabel = std::pair<int, int>;

/// Eigenbasis of the static Hamiltonian with each eigenvector tagged by the
/// bare product state it overlaps most. Column c of `vectors` is the dressed
/// state labeled `labels[c]`; columns are in ascending energy order.
struct DressedBasis {
  std::vector<StateLabel> labels;
  CMatrix vectors;
  RVector energies;
  int levels2 = 2;
  /// Smallest |<bare|dressed>|^2 among assigned pairs.
  double min_overlap = 1.0;
  /// Set when some assigned overlap is at or below 1/2.
  bool unreliable = false;

  /// Column of the dressed state labeled `label`.
  int column(StateLabel label) const;
  /// Dressed state as a composite vector.
  CVector state(StateLabel label) const;
  double energy(StateLabel label) const;
  /// Unitary whose column j1 * N2 + j2 is the dressed state labeled (j1, j2).
  CMatrix frame() const;
};

/// Greedy bijective labeling by descending overlap; ties resolved in energy
/// order.
DressedBasis dressed_states(const CoupledSystem& sys);
DressedBasis dressed_states(const CMatrix& h0, int levels1, int levels2);

/// <dressed a| H_k |dressed b>, k in {1, 2}.
Complex drive_matrix_element(const DressedBasis& basis, const CoupledSystem& sys,
                             StateLabel a, StateLabel b, int channel);

/// r = eps2 / eps1 with M1(a, b) + r M2(a, b) = 0. Throws std::domain_error if
/// both elements vanish (transition already dark) and std::invalid_argument
/// when only channel 1 couples the pair (no finite ratio).
double darkening_ratio(const DressedBasis& basis, const CoupledSystem& sys, StateLabel a,
                       StateLabel b);

/// Combined element M1 + r M2 for the drive eps1 (H1 + r H2).
Complex combined_element(const DressedBasis& basis, const CoupledSystem& sys, StateLabel a,
                         StateLabel b, double ratio);

/// eps1(t) = eps_max sin(pi t / T) cos(carrier t), eps2 = ratio * eps1,
/// sampled at step midpoints.
PulseSet build_crsd_pulses(double eps_max, double ratio, double total_time, int n_steps,
                           double carrier);

/// pi-area duration for a sine envelope: T_e = pi^2 / (2 eps_max |element|).
double estimate_duration(double eps_max, Complex gate_element);

struct LocalFidelityOptions {
  int starts = 16;
  double tolerance = 1e-8;
  int max_evaluations = 4000;
  std::uint64_t seed = 11;
};

struct LocalFidelityResult {
  double fidelity = 0.0;
  bool converged = true;
  /// Euler angles of the four U(2) factors (pre-1, pre-2, post-1, post-2).
  std::vector<double> angles;
};

/// Largest CNOT fidelity reachable by single-qubit unitaries applied before and
/// after `final_op`. Only the qubit block of `final_op` enters, so it may be the
/// full operator, its qubit columns, or the 4x4 block itself.
LocalFidelityResult local_fidelity(const CMatrix& final_op, const GateTarget& target,
                                   const LocalFidelityOptions& options = {});

/// Embedded single-qubit unitary: U(2) on levels {0, 1} of `qudit` (1 or 2),
/// identity elsewhere. Angles (alpha, beta, gamma) are ZYZ Euler angles.
CMatrix embed_local(const CoupledSystem& sys, int qudit, const CMatrix& u2);
CMatrix u2_from_angles(double alpha, double beta, double gamma);

enum class DarkeningMode { Computational, Leakage };  // |00>-|01> or |11>-|21>

struct ScanOptions {
  int n_points = 200;
  double ceiling = 6.0;       // scan up to ceiling * T_e
  double max_dt = 0.25;       // simulation step bound
  double carrier = 0.0;       // <= 0: second qudit's Larmor frequency
  bool dressed_frame = true;  // evaluate the gate in the dressed computational basis
  int workers = 1;
  LocalFidelityOptions local;
};

struct ScanResult {
  std::vector<double> durations;
  std::vector<double> fidelities;
  std::optional<double> gate_time;
  double gate_fidelity = 0.0;
  double estimated_duration = 0.0;  // T_e, or the undriven reference scale
  double ratio = 0.0;
  bool qualified = false;           // gate time came from a > 0.99 peak
};

/// The eps_max = 0 duration scale: time for the dressed conditional phase
/// E11 - E10 - E01 + E00 to reach pi, floored at T0.
double undriven_duration_scale(const DressedBasis& basis, const CoupledSystem& sys);

/// Simulate the CR/SD pulse for n_points durations in (0, ceiling * T_e] and
/// record the locally optimized fidelity at each; then extract the gate time.
ScanResult scan_durations(const CoupledSystem& sys, const LossSpec& loss, double eps_max,
                          double ratio, const ScanOptions& options = {});

/// Darkening ratio for the chosen mode at the system's parameters.
double mode_ratio(const CoupledSystem& sys, DarkeningMode mode);

/// First local maximum strictly above `threshold` scanning upward; otherwise
/// the global maximum. Returns (duration, fidelity) and whether it qualified.
struct GateTimeEstimate {
  double gate_time = 0.0;
  double gate_fidelity = 0.0;
  bool qualified = false;
};
GateTimeEstimate extract_gate_time(const std::vector<double>& durations,
                                   const std::vector<double>& fidelities,
                                   double threshold = 0.99);

const char* to_string(DarkeningMode mode);
std::optional<DarkeningMode> parse_darkening(const std::string& name);

}  // namespace qsl
