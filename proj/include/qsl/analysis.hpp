#pragma once

#include <optional>
#include <vector>

#include "qsl/grape.hpp"
#include "qsl/model.hpp"
#include "qsl/numerics.hpp"
#include "qsl/propagator.hpp"

namespace qsl {

/// Pass band [low_cut, high_cut] on |omega|; an absent edge is open.
struct FilterSpec {
  std::optional<double> low_cut;
  std::optional<double> high_cut;

  bool passes(double omega) const;
};

void validate(const FilterSpec& spec);

struct ChannelSpectrum {
  Spectrum spectrum;
  double peak_frequency = 0.0;  // largest |coefficient| over omega >= 0
  double peak_magnitude = 0.0;
  double band_peak_frequency = 0.0;  // same, restricted to the resonance band
  double band_peak_magnitude = 0.0;
};

/// Band used for peak-height comparisons between channels.
inline constexpr double kResonanceBandLow = 0.8;
inline constexpr double kResonanceBandHigh = 1.05;

std::vector<ChannelSpectrum> pulse_spectrum(const PulseSet& pulses);

/// Zero every DFT coefficient outside the pass band and transform back.
PulseSet band_filter(const PulseSet& pulses, const FilterSpec& spec);

struct PopulationReport {
  std::vector<double> times;
  PopulationSeries populations;  // averaged over |00>, |01>, |10>, |11>
};

PopulationReport population_report(const CoupledSystem& sys, const LossSpec& loss,
                                   const PulseSet& pulses);

struct FilteredFidelity {
  FilterSpec spec;
  double fidelity = 0.0;
};

/// Fidelity of the band-filtered pulse for each filter in `specs`.
std::vector<FilteredFidelity> filtered_fidelities(const CoupledSystem& sys, const LossSpec& loss,
                                                  const PulseSet& pulses,
                                                  const std::vector<FilterSpec>& specs);

}  // namespace qsl
