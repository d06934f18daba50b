#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsl/crsd.hpp"
#include "qsl/grape.hpp"
#include "qsl/model.hpp"

namespace qsl {

/// Invalid run configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One loss-rate variant. Either `top` (rates on the second-highest and highest
/// kept state of both qudits) or explicit per-state arrays.
struct LossSet {
  std::string label;  // empty: derived from the rates
  std::optional<std::pair<double, double>> top;
  std::vector<double> gamma1;
  std::vector<double> gamma2;

  LossSpec materialize(int levels) const;
  std::string display_label() const;
};

struct GrapeSettings {
  std::vector<double> t_over_t0;
  int restarts = 4;
  bool warm_start = true;
  OptimizerConfig optimizer;
  StepCountRule steps;
};

struct CrsdSettings {
  std::vector<double> eps_max;
  std::vector<DarkeningMode> darkening{DarkeningMode::Computational};
  /// Values of the state-2 anharmonicity to scan; empty keeps the system's.
  std::vector<double> eta2_values;
  ScanOptions scan;
};

struct OutputSettings {
  std::string directory = "out";
  bool pulses = true;  // write the best pulse of every sweep point
};

struct RunConfig {
  std::string name = "custom";
  std::vector<int> levels{2};
  double omega1_1 = 1.0;
  double omega1_2 = 0.9;
  double g = 0.0025;
  std::vector<double> anharmonicities1{-0.11, -0.19, -0.28};  // states 2, 3, 4
  std::vector<double> anharmonicities2{-0.11, -0.19, -0.28};
  /// Multipliers applied to every anharmonicity (sweep axis).
  std::vector<double> eta_scales{1.0};
  std::vector<LossSet> loss_sets{LossSet{}};
  GrapeSettings grape;
  CrsdSettings crsd;
  OutputSettings output;
  int workers = 1;

  /// System for one point of the (levels, eta_scale) grid.
  CoupledSystem system(int levels, double eta_scale) const;
};

/// Parse JSON text. Unknown keys and type mismatches raise ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Named parameter sets; a "-desk" suffix selects the reduced-budget variant.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Reduced iteration and step budget for interactive runs.
void apply_desk_scale(RunConfig& config);

/// Throws ConfigError on the first invalid field.
void validate(const RunConfig& config);

/// Canonical JSON form (sorted keys, every field explicit).
std::string to_json(const RunConfig& config);

/// 64-bit FNV-1a of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace qsl
