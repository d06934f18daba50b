#pragma once

#include <string>
#include <vector>

#include "qsl/analysis.hpp"
#include "qsl/config.hpp"

namespace qsl {

/// One summary point per sweep row: (T / T0, best F) for grape sweeps,
/// (eps_max, gate fidelity) for CR/SD scans, (omega, |c|) peaks for analyze.
struct SummaryPoint {
  double x = 0.0;
  double y = 0.0;
};

struct CommandReport {
  std::vector<std::string> files;  // written, in order
  std::vector<SummaryPoint> summary;
};

/// Writes grape_runs.csv (one row per optimization), grape_curve.csv (best
/// per point), manifest-grape.json and, if enabled, best pulses under pulses/.
CommandReport cmd_grape_sweep(const RunConfig& config, const std::string& out_dir);

/// Writes crsd_gates.csv (one row per drive strength) and crsd_scans.csv
/// (every simulated duration).
CommandReport cmd_crsd_scan(const RunConfig& config, const std::string& out_dir);

struct AnalyzeOptions {
  /// Empty: pass-all, high_cut 1.3, low_cut 0.5, band [0.5, 1.3], low_cut 2.
  std::vector<FilterSpec> filters;
};

/// Reads the pulse file completely before writing anything. Writes
/// spectrum.csv, peaks.csv, populations.csv and filters.csv.
CommandReport cmd_analyze(const std::string& pulse_path, const std::string& out_dir,
                          const AnalyzeOptions& options = {});

std::vector<FilterSpec> default_filters();

}  // namespace qsl
