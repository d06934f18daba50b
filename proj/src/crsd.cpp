#include "qsl/crsd.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace qsl {

int DressedBasis::column(StateLabel label) const {
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c] == label) return static_cast<int>(c);
  }
  std::ostringstream os;
  os << "no dressed state labeled |" << label.first << label.second << ">";
  throw std::invalid_argument(os.str());
}

CVector DressedBasis::state(StateLabel label) const { return vectors.col(column(label)); }

double DressedBasis::energy(StateLabel label) const { return energies(column(label)); }

CMatrix DressedBasis::frame() const {
  CMatrix w(vectors.rows(), vectors.cols());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    w.col(labels[c].first * levels2 + labels[c].second) = vectors.col(static_cast<Eigen::Index>(c));
  }
  return w;
}

DressedBasis dressed_states(const CMatrix& h0, int levels1, int levels2) {
  const EigenSystem es = herm_eigendecompose(h0);
  const int dim = levels1 * levels2;
  if (h0.rows() != dim) throw std::invalid_argument("dressed_states: dimension mismatch");

  struct Pair {
    double overlap;
    int dressed;
    int bare;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
  for (int c = 0; c < dim; ++c) {
    for (int i = 0; i < dim; ++i) pairs.push_back({std::norm(es.eigenvectors(i, c)), c, i});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.dressed != b.dressed) return a.dressed < b.dressed;
    return a.bare < b.bare;
  });

  DressedBasis basis;
  basis.levels2 = levels2;
  basis.vectors = es.eigenvectors;
  basis.energies = es.eigenvalues;
  basis.labels.assign(static_cast<std::size_t>(dim), {-1, -1});
  std::vector<bool> dressed_used(static_cast<std::size_t>(dim), false);
  std::vector<bool> bare_used(static_cast<std::size_t>(dim), false);
  int assigned = 0;
  for (const auto& p : pairs) {
    if (assigned == dim) break;
    if (dressed_used[static_cast<std::size_t>(p.dressed)] || bare_used[static_cast<std::size_t>(p.bare)]) continue;
    dressed_used[static_cast<std::size_t>(p.dressed)] = true;
    bare_used[static_cast<std::size_t>(p.bare)] = true;
    basis.labels[static_cast<std::size_t>(p.dressed)] = {p.bare / levels2, p.bare % levels2};
    basis.min_overlap = std::min(basis.min_overlap, p.overlap);
    ++assigned;
  }
  basis.unreliable = basis.min_overlap <= 0.5;
  return basis;
}

DressedBasis dressed_states(const CoupledSystem& sys) {
  return dressed_states(build_static_hamiltonian(sys), sys.qudit1.n_levels, sys.qudit2.n_levels);
}

Complex drive_matrix_element(const DressedBasis& basis, const CoupledSystem& sys, StateLabel a,
                             StateLabel b, int channel) {
  if (channel != 1 && channel != 2) throw std::invalid_argument("drive channel must be 1 or 2");
  const auto controls = build_control_hamiltonians(sys);
  const CMatrix& h = controls[static_cast<std::size_t>(channel - 1)];
  return basis.state(a).dot(h * basis.state(b));
}

double darkening_ratio(const DressedBasis& basis, const CoupledSystem& sys, StateLabel a,
                       StateLabel b) {
  const Complex m1 = drive_matrix_element(basis, sys, a, b, 1);
  const Complex m2 = drive_matrix_element(basis, sys, a, b, 2);
  constexpr double kZero = 1e-14;
  if (std::abs(m1) < kZero && std::abs(m2) < kZero) {
    throw std::domain_error("darkening_ratio: transition is already dark on both channels");
  }
  if (std::abs(m2) < kZero) {
    throw std::invalid_argument("darkening_ratio: channel 2 does not couple the transition");
  }
  const double r = -(m1 / m2).real();
  return r == 0.0 ? 0.0 : r;
}

Complex combined_element(const DressedBasis& basis, const CoupledSystem& sys, StateLabel a,
                         StateLabel b, double ratio) {
  return drive_matrix_element(basis, sys, a, b, 1) + ratio * drive_matrix_element(basis, sys, a, b, 2);
}

PulseSet build_crsd_pulses(double eps_max, double ratio, double total_time, int n_steps,
                           double carrier) {
  if (!(total_time > 0.0)) throw std::invalid_argument("build_crsd_pulses: T must be > 0");
  if (n_steps < 1) throw std::invalid_argument("build_crsd_pulses: need at least one step");
  PulseSet p;
  p.dt = total_time / n_steps;
  p.amplitudes.resize(2, n_steps);
  for (int j = 0; j < n_steps; ++j) {
    const double t = (j + 0.5) * p.dt;
    const double e1 = eps_max * std::sin(kPi * t / total_time) * std::cos(carrier * t);
    p.amplitudes(0, j) = e1;
    p.amplitudes(1, j) = ratio * e1;
  }
  return p;
}

double estimate_duration(double eps_max, Complex gate_element) {
  const double omega_peak = eps_max * std::abs(gate_element);
  if (!(omega_peak > 0.0)) {
    throw std::invalid_argument("estimate_duration: drive amplitude and gate element must be nonzero");
  }
  // Mean of the sine envelope is 2/pi; a pi pulse needs area pi.
  return kPi / ((2.0 / kPi) * omega_peak);
}

CMatrix u2_from_angles(double alpha, double beta, double gamma) {
  CMatrix rz1(2, 2);
  rz1 << std::polar(1.0, -0.5 * alpha), 0.0, 0.0, std::polar(1.0, 0.5 * alpha);
  CMatrix ry(2, 2);
  ry << std::cos(0.5 * beta), -std::sin(0.5 * beta), std::sin(0.5 * beta), std::cos(0.5 * beta);
  CMatrix rz2(2, 2);
  rz2 << std::polar(1.0, -0.5 * gamma), 0.0, 0.0, std::polar(1.0, 0.5 * gamma);
  return rz1 * ry * rz2;
}

CMatrix embed_local(const CoupledSystem& sys, int qudit, const CMatrix& u2) {
  if (u2.rows() != 2 || u2.cols() != 2) throw std::invalid_argument("embed_local: need a 2x2 unitary");
  const int n = qudit == 1 ? sys.qudit1.n_levels : sys.qudit2.n_levels;
  if (qudit != 1 && qudit != 2) throw std::invalid_argument("embed_local: qudit must be 1 or 2");
  CMatrix local = CMatrix::Identity(n, n);
  local.topLeftCorner(2, 2) = u2;
  const int other = qudit == 1 ? sys.qudit2.n_levels : sys.qudit1.n_levels;
  const CMatrix id = CMatrix::Identity(other, other);
  return qudit == 1 ? kron(local, id) : kron(id, local);
}

namespace {

CMatrix qubit_block(const CMatrix& op, const GateTarget& target) {
  if (op.rows() == 4 && op.cols() == 4) return op;
  const auto& q = target.qubit_indices;
  CMatrix block(4, 4);
  if (op.cols() == 4) {
    for (int r = 0; r < 4; ++r) block.row(r) = op.row(q[r]);
    return block;
  }
  if (op.rows() != op.cols() || op.rows() != target.matrix.rows()) {
    throw std::invalid_argument("local_fidelity: operator dimension mismatch");
  }
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) block(r, c) = op(q[r], q[c]);
  }
  return block;
}

CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  CMatrix out(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
  }
  return out;
}

struct LocalProblem {
  CMatrix block;       // 4x4 candidate
  CMatrix cnot_dag;    // 4x4

  double value(const double* x) const {
    const CMatrix pre = kron2(u2_from_angles(x[0], x[1], x[2]), u2_from_angles(x[3], x[4], x[5]));
    const CMatrix post = kron2(u2_from_angles(x[6], x[7], x[8]), u2_from_angles(x[9], x[10], x[11]));
    const Complex tr = (cnot_dag * post * block * pre).trace();
    return std::norm(tr / 4.0);
  }
};

double negated_value(const gsl_vector* x, void* params) {
  const auto* problem = static_cast<const LocalProblem*>(params);
  double buf[12];
  for (int i = 0; i < 12; ++i) buf[i] = gsl_vector_get(x, static_cast<std::size_t>(i));
  return -problem->value(buf);
}

}  // namespace

LocalFidelityResult local_fidelity(const CMatrix& final_op, const GateTarget& target,
                                   const LocalFidelityOptions& options) {
  LocalProblem problem;
  problem.block = qubit_block(final_op, target);
  CMatrix cnot(4, 4);
  cnot << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
  problem.cnot_dag = cnot.adjoint();

  gsl_set_error_handler_off();
  constexpr std::size_t kParams = 12;
  gsl_multimin_function fn{&negated_value, kParams, &problem};
  const gsl_multimin_fminimizer_type* type = gsl_multimin_fminimizer_nmsimplex2;
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(type, kParams);
  gsl_vector* x = gsl_vector_alloc(kParams);
  gsl_vector* step = gsl_vector_alloc(kParams);
  gsl_vector_set_all(step, 0.5);

  std::mt19937_64 rng(options.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };

  LocalFidelityResult best;
  best.fidelity = -1.0;
  best.converged = false;
  const int starts = std::max(1, options.starts);
  for (int s = 0; s < starts; ++s) {
    for (std::size_t i = 0; i < kParams; ++i) {
      double v = 0.0;
      if (s > 0) v = (i % 3 == 1) ? uniform(0.0, kPi) : uniform(0.0, 2.0 * kPi);
      gsl_vector_set(x, i, v);
    }
    gsl_multimin_fminimizer_set(solver, &fn, x, step);
    bool converged = false;
    for (int it = 0; it < options.max_evaluations; ++it) {
      if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
      const double size = gsl_multimin_fminimizer_size(solver);
      if (gsl_multimin_test_size(size, options.tolerance) == GSL_SUCCESS) {
        converged = true;
        break;
      }
    }
    const double f = -gsl_multimin_fminimizer_minimum(solver);
    if (f > best.fidelity) {
      best.fidelity = f;
      best.converged = converged;
      best.angles.resize(kParams);
      for (std::size_t i = 0; i < kParams; ++i) best.angles[i] = gsl_vector_get(solver->x, i);
    }
  }
  gsl_vector_free(step);
  gsl_vector_free(x);
  gsl_multimin_fminimizer_free(solver);
  best.fidelity = std::clamp(best.fidelity, 0.0, 1.0);
  return best;
}

double mode_ratio(const CoupledSystem& sys, DarkeningMode mode) {
  const DressedBasis basis = dressed_states(sys);
  if (mode == DarkeningMode::Computational) return darkening_ratio(basis, sys, {0, 0}, {0, 1});
  if (sys.qudit1.n_levels < 3) {
    throw std::invalid_argument("leakage darkening needs at least 3 levels on qudit 1");
  }
  return darkening_ratio(basis, sys, {1, 1}, {2, 1});
}

double undriven_duration_scale(const DressedBasis& basis, const CoupledSystem& sys) {
  const double zeta = basis.energy({1, 1}) - basis.energy({1, 0}) - basis.energy({0, 1}) +
                      basis.energy({0, 0});
  const double t0 = sys.t0();
  if (!(std::abs(zeta) > 0.0)) return t0;
  return std::max(t0, kPi / std::abs(zeta));
}

GateTimeEstimate extract_gate_time(const std::vector<double>& durations,
                                   const std::vector<double>& fidelities, double threshold) {
  if (durations.empty() || durations.size() != fidelities.size()) {
    throw std::invalid_argument("extract_gate_time: need equally sized, nonempty arrays");
  }
  const std::size_t n = fidelities.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double f = fidelities[i];
    if (!(f > threshold)) continue;
    const bool left = i == 0 || f >= fidelities[i - 1];
    const bool right = i + 1 == n || f >= fidelities[i + 1];
    if (left && right) return {durations[i], f, true};
  }
  const auto it = std::max_element(fidelities.begin(), fidelities.end());
  const auto i = static_cast<std::size_t>(it - fidelities.begin());
  return {durations[i], *it, false};
}

ScanResult scan_durations(const CoupledSystem& sys, const LossSpec& loss, double eps_max,
                          double ratio, const ScanOptions& options) {
  if (!(eps_max >= 0.0)) throw std::invalid_argument("scan_durations: eps_max must be >= 0");
  if (options.n_points < 1) throw std::invalid_argument("scan_durations: need at least one point");
  if (!(options.max_dt > 0.0)) throw std::invalid_argument("scan_durations: max_dt must be > 0");
  validate(loss, sys);

  const DressedBasis basis = dressed_states(sys);
  const GateTarget target = embed_cnot_target(sys);
  ScanResult out;
  out.ratio = ratio;
  if (eps_max > 0.0) {
    out.estimated_duration = estimate_duration(eps_max, combined_element(basis, sys, {1, 0}, {1, 1}, ratio));
  } else {
    out.estimated_duration = undriven_duration_scale(basis, sys);
  }
  const double carrier = options.carrier > 0.0 ? options.carrier : sys.qudit2.omega1;
  const auto n = static_cast<std::size_t>(options.n_points);
  out.durations.resize(n);
  out.fidelities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.durations[i] = options.ceiling * out.estimated_duration * static_cast<double>(i + 1) /
                       static_cast<double>(n);
  }

  // Computational states: dressed (or bare) qubit columns.
  CMatrix start(sys.dim(), 4);
  const CMatrix frame = options.dressed_frame ? basis.frame() : CMatrix::Identity(sys.dim(), sys.dim());
  const auto q = sys.qubit_indices();
  for (int c = 0; c < 4; ++c) start.col(c) = frame.col(q[c]);

  auto simulate = [&](std::size_t i) {
    const double duration = out.durations[i];
    const int steps = std::max(1, static_cast<int>(std::ceil(duration / options.max_dt - 1e-9)));
    const PulseSet pulses = build_crsd_pulses(eps_max, ratio, duration, steps, carrier);
    const Dynamics dyn = Dynamics::build(sys, loss, pulses.dt);
    CMatrix x = start;
    RMatrix h(dyn.dim(), dyn.dim());
    for (int j = 0; j < steps; ++j) {
      h = dyn.h0;
      h.noalias() += pulses.amplitudes(0, j) * dyn.controls[0];
      h.noalias() += pulses.amplitudes(1, j) * dyn.controls[1];
      SpectralExp(h, pulses.dt).apply(x);
      if (dyn.loss.size() != 0) x = dyn.loss.asDiagonal() * x;
    }
    const CMatrix block = start.adjoint() * x;
    out.fidelities[i] = local_fidelity(block, target, options.local).fidelity;
  };

  detail::run_parallel(n, options.workers, simulate);

  const GateTimeEstimate est = extract_gate_time(out.durations, out.fidelities);
  out.gate_time = est.gate_time;
  out.gate_fidelity = est.gate_fidelity;
  out.qualified = est.qualified;
  return out;
}

const char* to_string(DarkeningMode mode) {
  return mode == DarkeningMode::Computational ? "computational" : "leakage";
}

std::optional<DarkeningMode> parse_darkening(const std::string& name) {
  if (name == "computational" || name == "00-01") return DarkeningMode::Computational;
  if (name == "leakage" || name == "11-21") return DarkeningMode::Leakage;
  return std::nullopt;
}

}  // namespace qsl
