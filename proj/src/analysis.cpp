#include "qsl/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace qsl {

bool FilterSpec::passes(double omega) const {
  const double w = std::abs(omega);
  if (low_cut && w < *low_cut) return false;
  if (high_cut && w > *high_cut) return false;
  return true;
}

void validate(const FilterSpec& spec) {
  if (spec.low_cut && (!std::isfinite(*spec.low_cut) || *spec.low_cut < 0.0)) {
    throw std::invalid_argument("filter.low_cut: must be finite and >= 0");
  }
  if (spec.high_cut && (!std::isfinite(*spec.high_cut) || *spec.high_cut < 0.0)) {
    throw std::invalid_argument("filter.high_cut: must be finite and >= 0");
  }
  if (spec.low_cut && spec.high_cut && !(*spec.low_cut < *spec.high_cut)) {
    throw std::invalid_argument("filter: low_cut must be below high_cut");
  }
}

std::vector<ChannelSpectrum> pulse_spectrum(const PulseSet& pulses) {
  std::vector<ChannelSpectrum> out;
  for (int k = 0; k < pulses.channels(); ++k) {
    const RVector row = pulses.amplitudes.row(k);
    ChannelSpectrum cs;
    cs.spectrum = dft(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), pulses.dt);
    for (std::size_t i = 0; i < cs.spectrum.frequencies.size(); ++i) {
      const double w = cs.spectrum.frequencies[i];
      if (w < 0.0) continue;
      const double mag = std::abs(cs.spectrum.coefficients[i]);
      if (mag > cs.peak_magnitude) {
        cs.peak_magnitude = mag;
        cs.peak_frequency = w;
      }
      if (w >= kResonanceBandLow && w <= kResonanceBandHigh && mag > cs.band_peak_magnitude) {
        cs.band_peak_magnitude = mag;
        cs.band_peak_frequency = w;
      }
    }
    out.push_back(std::move(cs));
  }
  return out;
}

PulseSet band_filter(const PulseSet& pulses, const FilterSpec& spec) {
  validate(spec);
  PulseSet out = pulses;
  if (pulses.n_steps() < 2) return out;
  for (int k = 0; k < pulses.channels(); ++k) {
    const RVector row = pulses.amplitudes.row(k);
    Spectrum s = dft(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), pulses.dt);
    for (std::size_t i = 0; i < s.coefficients.size(); ++i) {
      if (!spec.passes(s.frequencies[i])) s.coefficients[i] = 0.0;
    }
    const auto filtered = inverse_dft(s);
    for (int j = 0; j < pulses.n_steps(); ++j) out.amplitudes(k, j) = filtered[static_cast<std::size_t>(j)];
  }
  return out;
}

PopulationReport population_report(const CoupledSystem& sys, const LossSpec& loss,
                                   const PulseSet& pulses) {
  const Dynamics dyn = pulses.n_steps() > 0 ? Dynamics::build(sys, loss, pulses.dt) : Dynamics::build(sys);
  PopulationReport report;
  const auto q = sys.qubit_indices();
  for (int s = 0; s < 4; ++s) {
    CVector psi0 = CVector::Zero(sys.dim());
    psi0(q[static_cast<std::size_t>(s)]) = 1.0;
    const Trajectory traj = evolve_state(dyn, pulses, psi0);
    const PopulationSeries pops = subspace_populations(traj, sys.qudit1.n_levels, sys.qudit2.n_levels);
    if (s == 0) {
      report.times = traj.times;
      report.populations.qubit.assign(pops.qubit.size(), 0.0);
      report.populations.second.assign(pops.qubit.size(), 0.0);
      report.populations.upper.assign(pops.qubit.size(), 0.0);
    }
    for (std::size_t i = 0; i < pops.qubit.size(); ++i) {
      report.populations.qubit[i] += 0.25 * pops.qubit[i];
      report.populations.second[i] += 0.25 * pops.second[i];
      report.populations.upper[i] += 0.25 * pops.upper[i];
    }
  }
  return report;
}

std::vector<FilteredFidelity> filtered_fidelities(const CoupledSystem& sys, const LossSpec& loss,
                                                  const PulseSet& pulses,
                                                  const std::vector<FilterSpec>& specs) {
  const GateTarget target = embed_cnot_target(sys);
  const Dynamics dyn = Dynamics::build(sys, loss, pulses.dt);
  std::vector<FilteredFidelity> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    out.push_back({spec, pulse_fidelity(dyn, band_filter(pulses, spec), target)});
  }
  return out;
}

}  // namespace qsl
