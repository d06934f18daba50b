#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qsl/numerics.hpp"

namespace qsl {

/// Level structure of one qudit. Energies are angular frequencies in units of
/// the first qudit's Larmor frequency (hbar = 1).
///
/// `anharmonicities[i]` holds eta for state index i + 2, so the first entry is
/// the second excited state. Entries beyond n_levels - 1 are ignored; missing
/// entries are zero.
struct QuditSpec {
  int n_levels = 2;
  double omega1 = 1.0;
  std::vector<double> anharmonicities;

  double anharmonicity(int state) const;
};

/// Two coupled qudits. Composite basis index is j1 * N2 + j2.
struct CoupledSystem {
  QuditSpec qudit1;
  QuditSpec qudit2;
  double g = 0.0025;

  int dim() const { return qudit1.n_levels * qudit2.n_levels; }
  int index(int j1, int j2) const { return j1 * qudit2.n_levels + j2; }
  std::pair<int, int> labels(int index) const {
    return {index / qudit2.n_levels, index % qudit2.n_levels};
  }
  /// Composite indices of |00>, |01>, |10>, |11> in that order.
  std::array<int, 4> qubit_indices() const {
    return {index(0, 0), index(0, 1), index(1, 0), index(1, 1)};
  }
  /// Reference CNOT time pi / (4 g) in internal time units (1 / omega1).
  double t0() const { return kPi / (4.0 * g); }
};

/// Per-state loss rates, indexed by state (entry 0 is the ground state).
/// Missing trailing entries are zero.
struct LossSpec {
  std::vector<double> gamma1;
  std::vector<double> gamma2;

  bool lossless() const;
};

/// Padded CNOT target: U_CNOT on the qubit subspace, zero elsewhere.
struct GateTarget {
  CMatrix matrix;
  std::array<int, 4> qubit_indices{};
  static constexpr int qubit_dim = 4;
};

/// Throws std::invalid_argument with a field-level message.
void validate(const QuditSpec& spec, const char* name = "qudit");
void validate(const CoupledSystem& sys);
void validate(const LossSpec& loss, const CoupledSystem& sys);

/// Truncated annihilation operator: <j-1|a|j> = sqrt(j).
CMatrix build_ladder(int n_levels);

/// omega_j = j * omega1 + eta_j, omega_0 = 0.
std::vector<double> qudit_energies(const QuditSpec& spec);

/// Level energies on both qudits plus g (a1 + a1^dag)(a2 + a2^dag).
CMatrix build_static_hamiltonian(const CoupledSystem& sys);

/// (a1 + a1^dag) (x) I and I (x) (a2 + a2^dag).
std::array<CMatrix, 2> build_control_hamiltonians(const CoupledSystem& sys);

/// Composite decay rates gamma1[j1] + gamma2[j2] in basis order.
RVector composite_loss_rates(const CoupledSystem& sys, const LossSpec& loss);

/// Diagonal exp(-Gamma dt), returned as its diagonal.
RVector loss_diagonal(const CoupledSystem& sys, const LossSpec& loss, double dt);

/// Same as loss_diagonal() but as a dense diagonal matrix.
CMatrix build_loss_factor(const CoupledSystem& sys, const LossSpec& loss, double dt);

GateTarget embed_cnot_target(const CoupledSystem& sys);

/// Parameter set used throughout the reference calculations: omega1 = 1 and
/// 0.9, g = 0.0025, eta = (-0.11, -0.19, -0.28) on states 2, 3, 4.
CoupledSystem reference_system(int n_levels);

}  // namespace qsl
