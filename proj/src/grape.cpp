#include "qsl/grape.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qsl {

namespace {

constexpr double kTargetDim = GateTarget::qubit_dim;

Complex overlap(const CMatrix& target_cols, const CMatrix& final_cols) {
  return (target_cols.conjugate().array() * final_cols.array()).sum();
}

struct Evaluation {
  std::vector<SpectralExp> steps;
  CMatrix final_cols;
  Complex overlap;
  double fidelity = 0.0;
};

Evaluation evaluate(const Dynamics& dyn, const PulseSet& pulses, const CMatrix& target_cols,
                    const CMatrix& start_cols) {
  Evaluation e;
  e.steps = factor_steps(dyn, pulses);
  e.final_cols = final_operator(dyn, e.steps, start_cols);
  e.overlap = overlap(target_cols, e.final_cols);
  e.fidelity = std::norm(e.overlap / kTargetDim);
  return e;
}

// -i dt exp(-i (a + b) dt / 2) sinc((a - b) dt / 2): the divided difference of
// exp(-i x dt) between a and b, stable for a -> b.
Complex divided_difference(double a, double b, double dt) {
  const double x = 0.5 * (a - b) * dt;
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return -kI * dt * std::polar(1.0, -0.5 * (a + b) * dt) * sinc;
}

RMatrix gradient_of(const Dynamics& dyn, const PulseSet& pulses, const Evaluation& e,
                    const CMatrix& target_cols, const CMatrix& start_cols, GradientMode mode) {
  const int n = pulses.n_steps();
  const int m = pulses.channels();
  const double dt = pulses.dt;
  RMatrix grad = RMatrix::Zero(m, n);
  if (n == 0) return grad;

  // X_0 .. X_N
  std::vector<CMatrix> xs;
  xs.reserve(static_cast<std::size_t>(n) + 1);
  xs.push_back(start_cols);
  for (int j = 0; j < n; ++j) {
    CMatrix x = xs.back();
    e.steps[static_cast<std::size_t>(j)].apply(x);
    if (dyn.loss.size() != 0) x = dyn.loss.asDiagonal() * x;
    xs.push_back(std::move(x));
  }

  const Complex c_conj = std::conj(e.overlap);
  const double pref = 2.0 / (kTargetDim * kTargetDim);
  CMatrix p = target_cols;  // P_N
  CMatrix hx;
  for (int j = n; j >= 1; --j) {
    const auto& step = e.steps[static_cast<std::size_t>(j - 1)];
    const CMatrix& xj = xs[static_cast<std::size_t>(j)];
    if (mode == GradientMode::FirstOrder) {
      for (int k = 0; k < m; ++k) {
        hx.noalias() = dyn.controls[static_cast<std::size_t>(k)] * xj;
        const Complex tr = (p.conjugate().array() * hx.array()).sum();
        grad(k, j - 1) = -pref * (kI * dt * tr * c_conj).real();
      }
    } else {
      // dc/du = Tr{P_j^dag L dU_j X_{j-1}}, dU_j = V (G o V^T H_k V) V^T.
      CMatrix lp = dyn.loss.size() != 0 ? CMatrix(dyn.loss.asDiagonal() * p) : p;
      const CMatrix a = step.to_eigenbasis(lp);
      const CMatrix b = step.to_eigenbasis(xs[static_cast<std::size_t>(j - 1)]);
      const CMatrix w = a.conjugate() * b.transpose();
      const RVector& lam = step.eigenvalues();
      const Eigen::Index d = lam.size();
      CMatrix gw(d, d);
      for (Eigen::Index q = 0; q < d; ++q) {
        for (Eigen::Index r = 0; r < d; ++r) gw(r, q) = divided_difference(lam(r), lam(q), dt) * w(r, q);
      }
      for (int k = 0; k < m; ++k) {
        const auto& hk = dyn.controls[static_cast<std::size_t>(k)];
        Complex dc;
        if (step.real_basis()) {
          const RMatrix kk = step.real_vectors().transpose() * hk * step.real_vectors();
          dc = (gw.array() * kk.array().cast<Complex>()).sum();
        } else {
          const CMatrix kk = step.rotate(hk.cast<Complex>());
          dc = (gw.array() * kk.array()).sum();
        }
        grad(k, j - 1) = pref * (c_conj * dc).real();
      }
    }
    // P_{j-1} = U_j^dag L P_j
    if (dyn.loss.size() != 0) p = dyn.loss.asDiagonal() * p;
    step.apply_adjoint(p);
  }
  return grad;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void check_finite(double f, int iteration) {
  if (!std::isfinite(f)) {
    std::ostringstream os;
    os << "fidelity became non-finite at iteration " << iteration;
    throw NumericalError(os.str());
  }
}

class Lbfgs {
 public:
  explicit Lbfgs(int memory) : memory_(memory) {}

  // Ascent direction for gradient g of the maximized objective.
  RVector direction(const RVector& g) const {
    RVector q = -g;
    std::vector<double> alpha(s_.size());
    for (std::size_t i = s_.size(); i-- > 0;) {
      alpha[i] = rho_[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    if (!s_.empty()) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double beta = rho_[i] * y_[i].dot(q);
      q += (alpha[i] - beta) * s_[i];
    }
    return -q;
  }

  void update(const RVector& s, const RVector& g_old, const RVector& g_new) {
    const RVector y = -(g_new - g_old);
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    if (static_cast<int>(s_.size()) == memory_) {
      s_.pop_front();
      y_.pop_front();
      rho_.pop_front();
    }
    s_.push_back(s);
    y_.push_back(y);
    rho_.push_back(1.0 / sy);
  }

  void reset() {
    s_.clear();
    y_.clear();
    rho_.clear();
  }

 private:
  int memory_;
  std::deque<RVector> s_;
  std::deque<RVector> y_;
  std::deque<double> rho_;
};

RVector flatten(const RMatrix& m) { return Eigen::Map<const RVector>(m.data(), m.size()); }

RMatrix unflatten(const RVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RMatrix>(v.data(), rows, cols);
}

}  // namespace

int StepCountRule::steps_for(double total_time) const {
  if (total_time <= 0.0) return 0;
  int n = max_dt > 0.0 ? static_cast<int>(std::ceil(total_time / max_dt - 1e-9))
                       : reference_step_count(total_time);
  return std::max(n, std::max(min_steps, 1));
}

CMatrix target_columns(const GateTarget& target) {
  CMatrix cols(target.matrix.rows(), GateTarget::qubit_dim);
  for (int c = 0; c < GateTarget::qubit_dim; ++c) cols.col(c) = target.matrix.col(target.qubit_indices[c]);
  return cols;
}

CMatrix qubit_columns(const GateTarget& target, int dim) {
  CMatrix cols = CMatrix::Zero(dim, GateTarget::qubit_dim);
  for (int c = 0; c < GateTarget::qubit_dim; ++c) cols(target.qubit_indices[c], c) = 1.0;
  return cols;
}

double fidelity(const CMatrix& final_op, const GateTarget& target) {
  const auto dim = target.matrix.rows();
  if (final_op.rows() != dim) throw std::invalid_argument("fidelity: dimension mismatch");
  Complex tr;
  if (final_op.cols() == dim) {
    tr = (target.matrix.conjugate().array() * final_op.array()).sum();
  } else if (final_op.cols() == GateTarget::qubit_dim) {
    tr = overlap(target_columns(target), final_op);
  } else {
    throw std::invalid_argument("fidelity: operator must be square or restricted to qubit columns");
  }
  return std::norm(tr / kTargetDim);
}

double pulse_fidelity(const Dynamics& dyn, const PulseSet& pulses, const GateTarget& target) {
  return evaluate(dyn, pulses, target_columns(target), qubit_columns(target, dyn.dim())).fidelity;
}

RMatrix gradient(const Dynamics& dyn, const PulseSet& pulses, const GateTarget& target,
                 GradientMode mode) {
  const CMatrix tc = target_columns(target);
  const CMatrix x0 = qubit_columns(target, dyn.dim());
  const Evaluation e = evaluate(dyn, pulses, tc, x0);
  return gradient_of(dyn, pulses, e, tc, x0, mode);
}

PulseSet init_pulses(const OptimizerConfig& config, int n_steps, double dt, int channels) {
  if (n_steps < 0 || channels < 1) throw std::invalid_argument("init_pulses: bad shape");
  double width = 1.0;
  double low = 0.0;
  switch (config.init_distribution) {
    case InitDistribution::Width1Centered: width = 1.0; low = -0.5; break;
    case InitDistribution::Width1FromZero: width = 1.0; low = 0.0; break;
    case InitDistribution::Width10Centered: width = 10.0; low = -5.0; break;
    case InitDistribution::Width10FromZero: width = 10.0; low = 0.0; break;
  }
  std::mt19937_64 rng(config.seed);
  PulseSet p;
  p.dt = dt;
  p.amplitudes.resize(channels, n_steps);
  // 53-bit mantissa draw; std::uniform_real_distribution is not portable.
  for (int j = 0; j < n_steps; ++j) {
    for (int k = 0; k < channels; ++k) {
      const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p.amplitudes(k, j) = low + width * r;
    }
  }
  return p;
}

PulseSet pad_pulses(const PulseSet& shorter, int n_steps, double dt) {
  PulseSet p;
  p.dt = dt;
  p.amplitudes = RMatrix::Zero(shorter.channels(), n_steps);
  const int old_n = shorter.n_steps();
  if (old_n == 0) return p;
  for (int j = 0; j < n_steps; ++j) {
    const double t = (j + 0.5) * dt;
    const int src = static_cast<int>(std::floor(t / shorter.dt));
    if (src < old_n) p.amplitudes.col(j) = shorter.amplitudes.col(src);
  }
  return p;
}

OptimizationResult optimize_from(const Dynamics& dyn, const GateTarget& target, PulseSet initial,
                                 const OptimizerConfig& config) {
  if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(config.step_rule.initial_step > 0.0) || !(config.step_rule.backtrack > 0.0) ||
      !(config.step_rule.backtrack < 1.0) || !(config.step_rule.growth >= 1.0)) {
    throw std::invalid_argument("step_rule: need initial_step > 0, 0 < backtrack < 1, growth >= 1");
  }
  const int record_every = std::max(1, config.record_every);
  const CMatrix tc = target_columns(target);
  const CMatrix x0 = qubit_columns(target, dyn.dim());

  OptimizationResult result;
  PulseSet u = std::move(initial);
  Evaluation current = evaluate(dyn, u, tc, x0);
  check_finite(current.fidelity, 0);
  result.fidelity_history.push_back(current.fidelity);

  const Eigen::Index rows = u.amplitudes.rows();
  const Eigen::Index cols = u.amplitudes.cols();
  Lbfgs lbfgs(config.lbfgs_memory);
  double step = config.step_rule.initial_step;
  int stalls = 0;
  int it = 0;
  // Ascent runs on log F when requested; the maximizer is the same, but the
  // curvature stays sane when loss pushes F toward underflow.
  auto search_gradient = [&](const Evaluation& e) {
    RVector grad = flatten(gradient_of(dyn, u, e, tc, x0, config.gradient));
    if (config.log_objective && e.fidelity > 0.0) grad /= e.fidelity;
    return grad;
  };
  RVector g = search_gradient(current);

  while (it < config.iterations && u.n_steps() > 0) {
    if (current.fidelity >= config.stop_fidelity) break;
    ++it;
    const double gmax = g.cwiseAbs().maxCoeff();
    if (!(gmax > 0.0)) break;

    RVector dir = g;
    bool quasi_newton = false;
    if (config.update == UpdateRule::Lbfgs) {
      dir = lbfgs.direction(g);
      if (dir.dot(g) > 0.0) {
        quasi_newton = true;
      } else {
        lbfgs.reset();
        dir = g;
      }
    }

    // Trial scale: largest amplitude change equals `step` for plain ascent; the
    // quasi-Newton step is tried at unit length, capped the same way.
    double scale = step / dir.cwiseAbs().maxCoeff();
    if (quasi_newton) scale = std::min(1.0, scale);

    bool accepted = false;
    Evaluation trial;
    PulseSet candidate = u;
    for (int tries = 0; tries < 60; ++tries) {
      candidate.amplitudes = u.amplitudes + unflatten(scale * dir, rows, cols);
      trial = evaluate(dyn, candidate, tc, x0);
      check_finite(trial.fidelity, it);
      if (trial.fidelity > current.fidelity) {
        accepted = true;
        break;
      }
      scale *= config.step_rule.backtrack;
      if (scale * dir.cwiseAbs().maxCoeff() < 1e-14) break;
    }

    if (accepted) {
      stalls = 0;
      const double moved = scale * dir.cwiseAbs().maxCoeff();
      step = std::max(step, moved) * config.step_rule.growth;
      const RVector s = scale * dir;
      u = std::move(candidate);
      current = std::move(trial);
      const RVector g_new = search_gradient(current);
      if (config.update == UpdateRule::Lbfgs) lbfgs.update(s, g, g_new);
      g = g_new;
    } else {
      ++stalls;
      lbfgs.reset();
      step = config.step_rule.initial_step;
      if (stalls >= config.max_stalls) {
        if (it % record_every != 0) result.fidelity_history.push_back(current.fidelity);
        break;
      }
    }
    if (it % record_every == 0) result.fidelity_history.push_back(current.fidelity);
  }
  if (it % record_every != 0 && result.fidelity_history.back() != current.fidelity) {
    result.fidelity_history.push_back(current.fidelity);
  }
  result.iterations_used = it;
  result.best_fidelity = current.fidelity;
  result.best_pulses = std::move(u);
  return result;
}

OptimizationResult optimize(const CoupledSystem& sys, const LossSpec& loss,
                            const GateTarget& target, double total_time,
                            const OptimizerConfig& config, const StepCountRule& steps) {
  if (!(total_time >= 0.0) || !std::isfinite(total_time)) {
    throw std::invalid_argument("optimize: total time must be finite and >= 0");
  }
  if (total_time == 0.0) {
    OptimizationResult r;
    const CMatrix id = CMatrix::Identity(sys.dim(), sys.dim());
    r.best_fidelity = fidelity(id, target);
    r.fidelity_history = {r.best_fidelity};
    r.best_pulses.amplitudes.resize(2, 0);
    return r;
  }
  const int n = steps.steps_for(total_time);
  const double dt = total_time / n;
  const Dynamics dyn = Dynamics::build(sys, loss, dt);
  return optimize_from(dyn, target, init_pulses(config, n, dt), config);
}

std::uint64_t sweep_seed(std::uint64_t base, std::size_t point, int restart) {
  return splitmix64(splitmix64(base ^ splitmix64(point + 1)) + static_cast<std::uint64_t>(restart));
}


SweepResult sweep_gate_time(const CoupledSystem& sys, const LossSpec& loss,
                            const GateTarget& target, const std::vector<double>& t_over_t0,
                            const OptimizerConfig& config, const StepCountRule& steps,
                            const SweepOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const double t0 = sys.t0();
  const std::size_t points = t_over_t0.size();
  const auto restarts = static_cast<std::size_t>(options.restarts);

  struct Job {
    SweepRun run;
    PulseSet pulses;
  };
  std::vector<Job> jobs(points * restarts);
  detail::run_parallel(jobs.size(), options.workers, [&](std::size_t i) {
    const std::size_t point = i / restarts;
    const int r = static_cast<int>(i % restarts);
    OptimizerConfig c = config;
    c.seed = sweep_seed(config.seed, point, r);
    c.init_distribution = static_cast<InitDistribution>(r % 4);
    const auto start = std::chrono::steady_clock::now();
    const double total = t_over_t0[point] * t0;
    OptimizationResult res = optimize(sys, loss, target, total, c, steps);
    Job& job = jobs[i];
    job.run.t_over_t0 = t_over_t0[point];
    job.run.restart_id = r;
    job.run.seed = c.seed;
    job.run.distribution = c.init_distribution;
    job.run.fidelity = res.best_fidelity;
    job.run.iterations = res.iterations_used;
    job.run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    job.run.n_steps = res.best_pulses.n_steps();
    job.run.dt = res.best_pulses.dt;
    job.pulses = std::move(res.best_pulses);
  });

  SweepResult out;
  out.curve.resize(points);
  for (std::size_t p = 0; p < points; ++p) {
    SweepPoint& sp = out.curve[p];
    sp.t_over_t0 = t_over_t0[p];
    sp.best_fidelity = -1.0;
    for (std::size_t r = 0; r < restarts; ++r) {
      Job& job = jobs[p * restarts + r];
      if (job.run.fidelity > sp.best_fidelity) {
        sp.best_fidelity = job.run.fidelity;
        sp.best_pulses = job.pulses;
      }
    }
  }

  std::vector<std::optional<SweepRun>> warm(points);
  if (options.warm_start && points > 1) {
    // Ascending T, sequential: each warm start may build on the previous one.
    std::vector<std::size_t> order(points);
    for (std::size_t i = 0; i < points; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return t_over_t0[a] < t_over_t0[b]; });
    for (std::size_t k = 1; k < order.size(); ++k) {
      const SweepPoint& prev = out.curve[order[k - 1]];
      SweepPoint& cur = out.curve[order[k]];
      if (prev.t_over_t0 >= cur.t_over_t0 || prev.best_pulses.n_steps() == 0) continue;
      const double total = cur.t_over_t0 * t0;
      const int n = steps.steps_for(total);
      const double dt = total / n;
      OptimizerConfig c = config;
      c.seed = sweep_seed(config.seed, order[k], options.restarts);
      const auto start = std::chrono::steady_clock::now();
      const Dynamics dyn = Dynamics::build(sys, loss, dt);
      OptimizationResult res = optimize_from(dyn, target, pad_pulses(prev.best_pulses, n, dt), c);
      SweepRun run;
      run.t_over_t0 = cur.t_over_t0;
      run.restart_id = options.restarts;
      run.seed = c.seed;
      run.distribution = c.init_distribution;
      run.warm_started = true;
      run.fidelity = res.best_fidelity;
      run.iterations = res.iterations_used;
      run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      run.n_steps = n;
      run.dt = dt;
      if (res.best_fidelity > cur.best_fidelity) {
        cur.best_fidelity = res.best_fidelity;
        cur.best_pulses = std::move(res.best_pulses);
      }
      warm[order[k]] = run;
    }
  }

  for (std::size_t p = 0; p < points; ++p) {
    for (std::size_t r = 0; r < restarts; ++r) out.runs.push_back(jobs[p * restarts + r].run);
    if (warm[p]) out.runs.push_back(*warm[p]);
  }
  return out;
}

const char* to_string(InitDistribution d) {
  switch (d) {
    case InitDistribution::Width1Centered: return "width1_centered";
    case InitDistribution::Width1FromZero: return "width1_from_zero";
    case InitDistribution::Width10Centered: return "width10_centered";
    case InitDistribution::Width10FromZero: return "width10_from_zero";
  }
  return "unknown";
}

std::optional<InitDistribution> parse_distribution(const std::string& name) {
  static const std::map<std::string, InitDistribution> table = {
      {"width1_centered", InitDistribution::Width1Centered},
      {"width1_from_zero", InitDistribution::Width1FromZero},
      {"width10_centered", InitDistribution::Width10Centered},
      {"width10_from_zero", InitDistribution::Width10FromZero},
  };
  const auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace qsl
