#include "qsl/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace qsl {

bool Dynamics::lossless() const {
  return loss.size() == 0 || (loss.array() == 1.0).all();
}

Dynamics Dynamics::build(const CoupledSystem& sys) {
  Dynamics d;
  d.h0 = build_static_hamiltonian(sys).real();
  const auto hc = build_control_hamiltonians(sys);
  d.controls = {hc[0].real(), hc[1].real()};
  return d;
}

Dynamics Dynamics::build(const CoupledSystem& sys, const LossSpec& loss, double dt) {
  Dynamics d = build(sys);
  if (!loss.lossless()) d.loss = loss_diagonal(sys, loss, dt);
  return d;
}

CMatrix step_unitary(const CMatrix& h0, std::span<const CMatrix> controls,
                     std::span<const double> u, double dt) {
  if (u.size() != controls.size()) {
    throw std::invalid_argument("step_unitary: amplitude count does not match channel count");
  }
  CMatrix h = h0;
  for (std::size_t k = 0; k < controls.size(); ++k) h += u[k] * controls[k];
  return propagator_exp(h, dt);
}

std::vector<SpectralExp> factor_steps(const Dynamics& dyn, const PulseSet& pulses) {
  if (pulses.channels() != static_cast<int>(dyn.controls.size())) {
    throw std::invalid_argument("pulse channel count does not match the system");
  }
  std::vector<SpectralExp> steps;
  steps.reserve(static_cast<std::size_t>(pulses.n_steps()));
  RMatrix h(dyn.dim(), dyn.dim());
  for (int j = 0; j < pulses.n_steps(); ++j) {
    h = dyn.h0;
    for (int k = 0; k < pulses.channels(); ++k) {
      h.noalias() += pulses.amplitudes(k, j) * dyn.controls[static_cast<std::size_t>(k)];
    }
    steps.emplace_back(h, pulses.dt);
  }
  return steps;
}

namespace {

void apply_loss(const Dynamics& dyn, CMatrix& block) {
  if (dyn.loss.size() == 0) return;
  block = dyn.loss.asDiagonal() * block;
}

}  // namespace

std::vector<CMatrix> forward_chain(const Dynamics& dyn, std::span<const SpectralExp> steps,
                                   const CMatrix& initial) {
  std::vector<CMatrix> chain;
  chain.reserve(steps.size());
  CMatrix x = initial;
  for (const auto& s : steps) {
    s.apply(x);
    apply_loss(dyn, x);
    chain.push_back(x);
  }
  return chain;
}

std::vector<CMatrix> forward_chain(const Dynamics& dyn, const PulseSet& pulses) {
  const auto steps = factor_steps(dyn, pulses);
  return forward_chain(dyn, steps, CMatrix::Identity(dyn.dim(), dyn.dim()));
}

std::vector<CMatrix> backward_chain(const Dynamics& dyn, std::span<const SpectralExp> steps,
                                    const CMatrix& target) {
  const std::size_t n = steps.size();
  std::vector<CMatrix> chain(n);
  if (n == 0) return chain;
  CMatrix p = target;
  chain[n - 1] = p;
  for (std::size_t j = n - 1; j >= 1; --j) {
    // P_j = U_{j+1}^dag L P_{j+1}; steps[j] holds U_{j+1}.
    apply_loss(dyn, p);
    steps[j].apply_adjoint(p);
    chain[j - 1] = p;
  }
  return chain;
}

std::vector<CMatrix> backward_chain(const Dynamics& dyn, const PulseSet& pulses,
                                    const GateTarget& target) {
  const auto steps = factor_steps(dyn, pulses);
  return backward_chain(dyn, steps, target.matrix);
}

CMatrix final_operator(const Dynamics& dyn, std::span<const SpectralExp> steps,
                       const CMatrix& initial) {
  CMatrix x = initial;
  for (const auto& s : steps) {
    s.apply(x);
    apply_loss(dyn, x);
  }
  return x;
}

Trajectory evolve_state(const Dynamics& dyn, const PulseSet& pulses, const CVector& psi0) {
  if (psi0.size() != dyn.dim()) throw std::invalid_argument("evolve_state: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("evolve_state: initial state must be normalized");
  }
  const auto steps = factor_steps(dyn, pulses);
  Trajectory traj;
  traj.times.reserve(steps.size() + 1);
  traj.states.reserve(steps.size() + 1);
  CMatrix psi = psi0;
  traj.times.push_back(0.0);
  traj.states.push_back(psi0);
  for (std::size_t j = 0; j < steps.size(); ++j) {
    steps[j].apply(psi);
    apply_loss(dyn, psi);
    traj.times.push_back(pulses.dt * static_cast<double>(j + 1));
    traj.states.emplace_back(psi.col(0));
  }
  return traj;
}

PopulationSeries subspace_populations(const Trajectory& traj, int levels1, int levels2) {
  PopulationSeries out;
  const int dim = levels1 * levels2;
  out.qubit.reserve(traj.states.size());
  out.second.reserve(traj.states.size());
  out.upper.reserve(traj.states.size());
  for (const auto& psi : traj.states) {
    if (psi.size() != dim) throw std::invalid_argument("subspace_populations: dimension mismatch");
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    for (int i = 0; i < dim; ++i) {
      const int j1 = i / levels2;
      const int j2 = i % levels2;
      const double p = std::norm(psi(i));
      const int top = std::max(j1, j2);
      if (top <= 1) {
        a += p;
      } else if (top == 2) {
        b += p;
      } else {
        c += p;
      }
    }
    out.qubit.push_back(a);
    out.second.push_back(b);
    out.upper.push_back(c);
  }
  return out;
}

int reference_step_count(double total_time) {
  const double periods = total_time / (2.0 * kPi);
  if (periods <= 50.0) return 1000;
  if (periods <= 400.0) return 10000;
  return 20000;
}

}  // namespace qsl
