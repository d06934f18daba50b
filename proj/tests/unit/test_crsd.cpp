#include <doctest.h>

#include <cmath>
#include <random>

#include "qsl/crsd.hpp"
#include "unit/helpers.hpp"

using namespace qsl;
using namespace qsl::testing;

namespace {

CMatrix cnot4() {
  CMatrix c = CMatrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

CMatrix random_u2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(0.0, 2 * kPi), b(0.0, kPi);
  const double x = a(rng), y = b(rng), z = a(rng);
  return u2_from_angles(x, y, z);
}

// kron on 2x2 factors, first factor on qudit 1.
CMatrix local4(const CMatrix& a, const CMatrix& b) { return kron(a, b); }

// Random-sampling lower bound on the locally optimized CNOT fidelity.
double sampled_local_fidelity(const CMatrix& u, int samples, std::mt19937_64& rng) {
  const CMatrix cd = cnot4().adjoint();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const CMatrix pre = local4(random_u2(rng), random_u2(rng));
    const CMatrix post = local4(random_u2(rng), random_u2(rng));
    best = std::max(best, std::norm((cd * post * u * pre).trace() / 4.0));
  }
  return best;
}

GateTarget qubit_target() {
  GateTarget t;
  t.matrix = cnot4();
  t.qubit_indices = {0, 1, 2, 3};
  return t;
}

}  // namespace

TEST_CASE("without coupling dressed states are the bare states") {
  for (int n : {2, 3, 4}) {
    CoupledSystem sys = reference_system(n);
    sys.g = 0.0;
    const DressedBasis b = dressed_states(sys);
    CHECK(max_abs(b.frame() - CMatrix::Identity(sys.dim(), sys.dim())) < 1e-14);
    CHECK(b.min_overlap == doctest::Approx(1.0));
    CHECK_FALSE(b.unreliable);
    const auto e1 = qudit_energies(sys.qudit1);
    const auto e2 = qudit_energies(sys.qudit2);
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) CHECK(b.energy({j1, j2}) == doctest::Approx(e1[j1] + e2[j2]));
  }
}

TEST_CASE("dressing of the one-excitation pair follows two-level mixing") {
  const CoupledSystem sys = reference_system(2);
  const DressedBasis b = dressed_states(sys);
  // {|01>, |10>} block: detuning 0.1, coupling g; counter-rotating terms shift this only at O(g^2 / 2).
  const double delta = sys.qudit1.omega1 - sys.qudit2.omega1;
  const double theta = 0.5 * std::atan2(2 * sys.g, delta);
  const double expected = std::pow(std::cos(theta), 2);
  CHECK(std::norm(b.state({0, 1})(sys.index(0, 1))) == doctest::Approx(expected).epsilon(1e-5));
  CHECK(std::norm(b.state({1, 0})(sys.index(1, 0))) == doctest::Approx(expected).epsilon(1e-5));
  CHECK(b.min_overlap < 1.0);
  CHECK(b.min_overlap > 0.99);
  const CMatrix f = b.frame();
  CHECK(max_abs(f.adjoint() * f - CMatrix::Identity(4, 4)) < 1e-12);
}

TEST_CASE("cross-drive element on the target transition is perturbative") {
  const CoupledSystem sys = reference_system(2);
  const DressedBasis b = dressed_states(sys);
  // Qudit-1 drive reaches |00> - |01> only through dressing: g / (w1 - w2) + g / (w1 + w2).
  const double m1 = std::abs(drive_matrix_element(b, sys, {0, 0}, {0, 1}, 1));
  const double expected = sys.g / 0.1 + sys.g / 1.9;
  CHECK(m1 == doctest::Approx(expected).epsilon(2e-2));
  CHECK(std::abs(drive_matrix_element(b, sys, {0, 0}, {0, 1}, 2)) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(drive_matrix_element(b, sys, {0, 0}, {0, 1}, 3), std::invalid_argument);
}

TEST_CASE("darkening ratios") {
  SUBCASE("uncoupled computational transition needs no cancellation") {
    CoupledSystem sys = reference_system(2);
    sys.g = 0.0;
    CHECK(mode_ratio(sys, DarkeningMode::Computational) == 0.0);
  }
  SUBCASE("dark on both channels") {
    CoupledSystem sys = reference_system(2);
    sys.g = 0.0;
    CHECK_THROWS_AS(darkening_ratio(dressed_states(sys), sys, {0, 0}, {1, 1}), std::domain_error);
  }
  SUBCASE("only channel 1 couples") {
    CoupledSystem sys = reference_system(2);
    sys.g = 0.0;
    CHECK_THROWS_AS(darkening_ratio(dressed_states(sys), sys, {0, 0}, {1, 0}), std::invalid_argument);
  }
  SUBCASE("computational mode cancels at about g / detuning") {
    const CoupledSystem sys = reference_system(2);
    const double r = mode_ratio(sys, DarkeningMode::Computational);
    CHECK(r == doctest::Approx(sys.g / 0.1 + sys.g / 1.9).epsilon(2e-2));
    CHECK(r > 0.0);
  }
  SUBCASE("leakage mode on the reference four-level system") {
    const CoupledSystem sys = reference_system(4);
    CHECK(mode_ratio(sys, DarkeningMode::Leakage) == doctest::Approx(-3.371).epsilon(1e-3));
    CHECK_THROWS_AS(mode_ratio(reference_system(2), DarkeningMode::Leakage), std::invalid_argument);
  }
  SUBCASE("the darkened element is suppressed") {
    for (int n : {2, 3, 4}) {
      const CoupledSystem sys = reference_system(n);
      const DressedBasis b = dressed_states(sys);
      const double r = mode_ratio(sys, DarkeningMode::Computational);
      const double dark = std::abs(combined_element(b, sys, {0, 0}, {0, 1}, r));
      const double bright = std::abs(drive_matrix_element(b, sys, {0, 0}, {0, 1}, 1));
      CHECK(dark * 100 < bright);
      if (n >= 3) {
        const double rl = mode_ratio(sys, DarkeningMode::Leakage);
        CHECK(std::abs(combined_element(b, sys, {1, 1}, {2, 1}, rl)) * 100 <
              std::abs(drive_matrix_element(b, sys, {1, 1}, {2, 1}, 1)));
      }
    }
  }
  CHECK(parse_darkening(to_string(DarkeningMode::Leakage)) == DarkeningMode::Leakage);
  CHECK(parse_darkening("computational") == DarkeningMode::Computational);
  CHECK_FALSE(parse_darkening("both"));
}

TEST_CASE("CR/SD pulse shape") {
  const double eps = 0.02, r = -0.3, total = 100.0, carrier = 0.9;
  const PulseSet p = build_crsd_pulses(eps, r, total, 400, carrier);
  CHECK(p.dt == doctest::Approx(0.25));
  for (int j = 0; j < 400; ++j) {
    const double t = (j + 0.5) * p.dt;
    CHECK(p.amplitudes(0, j) == doctest::Approx(eps * std::sin(kPi * t / total) * std::cos(carrier * t)));
    CHECK(p.amplitudes(1, j) == doctest::Approx(r * p.amplitudes(0, j)));
  }
  CHECK(p.amplitudes.cwiseAbs().maxCoeff() <= eps);
  CHECK_THROWS_AS(build_crsd_pulses(eps, r, 0.0, 10, carrier), std::invalid_argument);
  CHECK_THROWS_AS(build_crsd_pulses(eps, r, 1.0, 0, carrier), std::invalid_argument);
}

TEST_CASE("pi-area duration estimate") {
  CHECK(estimate_duration(0.01, 1.0) == doctest::Approx(493.48).epsilon(1e-5));
  CHECK(estimate_duration(0.02, Complex(0, 1)) == doctest::Approx(493.48 / 2).epsilon(1e-5));
  CHECK_THROWS_AS(estimate_duration(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("local fidelity") {
  std::mt19937_64 rng(50);
  const GateTarget t = qubit_target();
  LocalFidelityOptions opt;
  opt.starts = 8;

  SUBCASE("CNOT and its global-phase copies") {
    CHECK(local_fidelity(cnot4(), t, opt).fidelity == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(local_fidelity(std::exp(Complex(0, 0.7)) * cnot4(), t, opt).fidelity == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("locally dressed CNOT") {
    for (int trial = 0; trial < 3; ++trial) {
      const CMatrix u = local4(random_u2(rng), random_u2(rng)) * cnot4() * local4(random_u2(rng), random_u2(rng));
      CHECK(local_fidelity(u, t, opt).fidelity == doctest::Approx(1.0).epsilon(1e-7));
    }
  }
  SUBCASE("SWAP against a random-sampling lower bound") {
    CMatrix swap = CMatrix::Zero(4, 4);
    swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
    const double f = local_fidelity(swap, t, opt).fidelity;
    const double sampled = sampled_local_fidelity(swap, 2000, rng);
    CHECK(f >= sampled - 1e-9);
    CHECK(f < 0.9);
  }
  SUBCASE("invariance under local dressing of a random unitary") {
    const CMatrix u = random_unitary(4, rng);
    const CMatrix v = local4(random_u2(rng), random_u2(rng)) * u * local4(random_u2(rng), random_u2(rng));
    const double fu = local_fidelity(u, t, opt).fidelity;
    CHECK(local_fidelity(v, t, opt).fidelity == doctest::Approx(fu).epsilon(1e-6));
    CHECK(fu >= sampled_local_fidelity(u, 1000, rng) - 1e-9);
  }
  SUBCASE("qubit block is taken from padded operators") {
    const CoupledSystem sys = reference_system(3);
    const GateTarget full = embed_cnot_target(sys);
    CHECK(local_fidelity(full.matrix, full, opt).fidelity == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(local_fidelity(CMatrix::Identity(5, 5), full, opt), std::invalid_argument);
  }
}

TEST_CASE("embedded local unitaries") {
  const CoupledSystem sys = reference_system(3);
  const CMatrix u = u2_from_angles(0.3, 1.1, -0.4);
  CHECK(max_abs(u.adjoint() * u - CMatrix::Identity(2, 2)) < 1e-14);
  const CMatrix e1 = embed_local(sys, 1, u);
  const CMatrix e2 = embed_local(sys, 2, u);
  CHECK(max_abs(e1.adjoint() * e1 - CMatrix::Identity(9, 9)) < 1e-14);
  CHECK(e1(sys.index(1, 0), sys.index(0, 0)) == u(1, 0));
  CHECK(e2(sys.index(0, 1), sys.index(0, 0)) == u(1, 0));
  CHECK(e1(sys.index(2, 2), sys.index(2, 2)) == Complex(1));
}

TEST_CASE("gate-time extraction") {
  const std::vector<double> d{1, 2, 3, 4, 5, 6};
  SUBCASE("first qualified local maximum wins") {
    const auto e = extract_gate_time(d, {0.5, 0.995, 0.992, 0.999, 0.3, 0.1});
    CHECK(e.qualified);
    CHECK(e.gate_time == 2);
    CHECK(e.gate_fidelity == 0.995);
  }
  SUBCASE("rising edge above threshold is skipped") {
    const auto e = extract_gate_time(d, {0.5, 0.991, 0.996, 0.5, 0.3, 0.1});
    CHECK(e.gate_time == 3);
  }
  SUBCASE("maximum at the scan end still counts") {
    const auto e = extract_gate_time(d, {0.1, 0.2, 0.3, 0.4, 0.5, 0.995});
    CHECK(e.qualified);
    CHECK(e.gate_time == 6);
  }
  SUBCASE("global maximum fallback") {
    const auto e = extract_gate_time(d, {0.1, 0.8, 0.7, 0.95, 0.2, 0.1});
    CHECK_FALSE(e.qualified);
    CHECK(e.gate_time == 4);
    CHECK(e.gate_fidelity == 0.95);
  }
  CHECK_THROWS_AS(extract_gate_time({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(extract_gate_time({1, 2}, {0.1}), std::invalid_argument);
}

TEST_CASE("two-level CR/SD scan") {
  const CoupledSystem sys = reference_system(2);
  const double r = mode_ratio(sys, DarkeningMode::Computational);
  ScanOptions opt;
  opt.n_points = 30;
  opt.ceiling = 2.0;
  opt.max_dt = 0.5;
  opt.local.starts = 4;
  // Weak drive: the qudit-1 drive stays well below its 0.1 detuning.
  const ScanResult a = scan_durations(sys, LossSpec{}, 0.02, r, opt);
  REQUIRE(a.durations.size() == 30);
  CHECK(a.ratio == r);
  CHECK(a.durations.back() == doctest::Approx(2.0 * a.estimated_duration));
  for (std::size_t i = 1; i < a.durations.size(); ++i) CHECK(a.durations[i] > a.durations[i - 1]);
  for (double f : a.fidelities) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 + 1e-12);
  }
  REQUIRE(a.gate_time);
  CHECK(a.gate_fidelity > 0.9);
  CHECK(*a.gate_time == doctest::Approx(a.estimated_duration).epsilon(0.1));

  const ScanResult b = scan_durations(sys, LossSpec{}, 0.04, r, opt);
  CHECK(b.estimated_duration == doctest::Approx(a.estimated_duration / 2));
  REQUIRE(b.gate_time);
  CHECK(*a.gate_time / *b.gate_time == doctest::Approx(2.0).epsilon(0.15));

  CHECK_THROWS_AS(scan_durations(sys, LossSpec{}, -0.1, r, opt), std::invalid_argument);
}

TEST_CASE("no coupling, no entangling gate") {
  CoupledSystem sys = reference_system(2);
  sys.g = 0.0;
  ScanOptions opt;
  opt.n_points = 12;
  opt.ceiling = 2.0;
  opt.max_dt = 0.5;
  opt.local.starts = 4;
  // Ratio 1 lets channel 2 drive the target transition directly.
  const ScanResult s = scan_durations(sys, LossSpec{}, 0.1, 1.0, opt);
  CHECK(*std::max_element(s.fidelities.begin(), s.fidelities.end()) < 0.99);
  CHECK_FALSE(s.qualified);
}

TEST_CASE("undriven duration scale") {
  const CoupledSystem sys = reference_system(3);
  const DressedBasis b = dressed_states(sys);
  const double zeta = b.energy({1, 1}) - b.energy({1, 0}) - b.energy({0, 1}) + b.energy({0, 0});
  CHECK(zeta != 0.0);
  CHECK(undriven_duration_scale(b, sys) == doctest::Approx(std::max(sys.t0(), kPi / std::abs(zeta))));
  CoupledSystem free = sys;
  free.g = 0.0;
  // Uncoupled: no conditional phase, falls back to T0 computed from the (zero) coupling.
  CHECK(std::isinf(undriven_duration_scale(dressed_states(free), free)));
}
