#include "qsl/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qsl {

double QuditSpec::anharmonicity(int state) const {
  if (state < 2) return 0.0;
  const auto i = static_cast<std::size_t>(state - 2);
  return i < anharmonicities.size() ? anharmonicities[i] : 0.0;
}

bool LossSpec::lossless() const {
  for (double r : gamma1) {
    if (r != 0.0) return false;
  }
  for (double r : gamma2) {
    if (r != 0.0) return false;
  }
  return true;
}

void validate(const QuditSpec& spec, const char* name) {
  if (spec.n_levels < 2) {
    std::ostringstream os;
    os << name << ".levels: need at least 2 levels, got " << spec.n_levels;
    throw std::invalid_argument(os.str());
  }
  if (!std::isfinite(spec.omega1)) {
    throw std::invalid_argument(std::string(name) + ".omega1: not finite");
  }
  for (double eta : spec.anharmonicities) {
    if (!std::isfinite(eta)) {
      throw std::invalid_argument(std::string(name) + ".anharmonicities: not finite");
    }
  }
}

void validate(const CoupledSystem& sys) {
  validate(sys.qudit1, "qudit1");
  validate(sys.qudit2, "qudit2");
  if (!std::isfinite(sys.g) || sys.g < 0.0) {
    throw std::invalid_argument("g: coupling must be finite and non-negative");
  }
}

void validate(const LossSpec& loss, const CoupledSystem& sys) {
  auto check = [](const std::vector<double>& rates, int levels, const char* name) {
    for (std::size_t j = 0; j < rates.size(); ++j) {
      if (!std::isfinite(rates[j]) || rates[j] < 0.0) {
        std::ostringstream os;
        os << name << "[" << j << "]: loss rate must be finite and >= 0, got " << rates[j];
        throw std::invalid_argument(os.str());
      }
      if (static_cast<int>(j) >= levels && rates[j] != 0.0) {
        std::ostringstream os;
        os << name << "[" << j << "]: state does not exist in a " << levels << "-level qudit";
        throw std::invalid_argument(os.str());
      }
    }
  };
  check(loss.gamma1, sys.qudit1.n_levels, "loss.gamma1");
  check(loss.gamma2, sys.qudit2.n_levels, "loss.gamma2");
}

CMatrix build_ladder(int n_levels) {
  if (n_levels < 2) throw std::invalid_argument("build_ladder: n_levels must be >= 2");
  CMatrix a = CMatrix::Zero(n_levels, n_levels);
  for (int j = 1; j < n_levels; ++j) a(j - 1, j) = std::sqrt(static_cast<double>(j));
  return a;
}

std::vector<double> qudit_energies(const QuditSpec& spec) {
  std::vector<double> w(static_cast<std::size_t>(spec.n_levels));
  for (int j = 0; j < spec.n_levels; ++j) {
    w[static_cast<std::size_t>(j)] = j * spec.omega1 + spec.anharmonicity(j);
  }
  return w;
}

namespace {

CMatrix position(int n_levels) {
  const CMatrix a = build_ladder(n_levels);
  return a + a.adjoint();
}

}  // namespace

CMatrix build_static_hamiltonian(const CoupledSystem& sys) {
  validate(sys);
  const int n1 = sys.qudit1.n_levels;
  const int n2 = sys.qudit2.n_levels;
  const auto w1 = qudit_energies(sys.qudit1);
  const auto w2 = qudit_energies(sys.qudit2);
  CMatrix h = sys.g * kron(position(n1), position(n2));
  for (int j1 = 0; j1 < n1; ++j1) {
    for (int j2 = 0; j2 < n2; ++j2) {
      const int k = sys.index(j1, j2);
      h(k, k) += w1[static_cast<std::size_t>(j1)] + w2[static_cast<std::size_t>(j2)];
    }
  }
  return h;
}

std::array<CMatrix, 2> build_control_hamiltonians(const CoupledSystem& sys) {
  validate(sys);
  const int n1 = sys.qudit1.n_levels;
  const int n2 = sys.qudit2.n_levels;
  return {kron(position(n1), CMatrix::Identity(n2, n2)),
          kron(CMatrix::Identity(n1, n1), position(n2))};
}

RVector composite_loss_rates(const CoupledSystem& sys, const LossSpec& loss) {
  validate(loss, sys);
  auto rate = [](const std::vector<double>& r, int j) {
    const auto i = static_cast<std::size_t>(j);
    return i < r.size() ? r[i] : 0.0;
  };
  RVector rates(sys.dim());
  for (int j1 = 0; j1 < sys.qudit1.n_levels; ++j1) {
    for (int j2 = 0; j2 < sys.qudit2.n_levels; ++j2) {
      rates(sys.index(j1, j2)) = rate(loss.gamma1, j1) + rate(loss.gamma2, j2);
    }
  }
  return rates;
}

RVector loss_diagonal(const CoupledSystem& sys, const LossSpec& loss, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_loss_factor: dt must be > 0");
  RVector rates = composite_loss_rates(sys, loss);
  return (-dt * rates.array()).exp().matrix();
}

CMatrix build_loss_factor(const CoupledSystem& sys, const LossSpec& loss, double dt) {
  return loss_diagonal(sys, loss, dt).cast<Complex>().asDiagonal();
}

GateTarget embed_cnot_target(const CoupledSystem& sys) {
  validate(sys);
  GateTarget t;
  t.qubit_indices = sys.qubit_indices();
  t.matrix = CMatrix::Zero(sys.dim(), sys.dim());
  const auto& q = t.qubit_indices;
  // |00> -> |00>, |01> -> |01>, |10> -> |11>, |11> -> |10>
  t.matrix(q[0], q[0]) = 1.0;
  t.matrix(q[1], q[1]) = 1.0;
  t.matrix(q[3], q[2]) = 1.0;
  t.matrix(q[2], q[3]) = 1.0;
  return t;
}

CoupledSystem reference_system(int n_levels) {
  CoupledSystem sys;
  sys.qudit1 = QuditSpec{n_levels, 1.0, {-0.11, -0.19, -0.28}};
  sys.qudit2 = QuditSpec{n_levels, 0.9, {-0.11, -0.19, -0.28}};
  sys.g = 0.0025;
  return sys;
}

}  // namespace qsl
