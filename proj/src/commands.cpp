#include "qsl/commands.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include <json.hpp>

#include "qsl/records.hpp"

namespace qsl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// File-name safe rendering of a number.
std::string tag(double x) {
  std::string s = format_short(x);
  for (char& c : s) {
    if (c == '-') c = 'm';
    else if (c == '.') c = 'p';
    else if (c == '+') c = '_';
  }
  return s;
}

std::string eta_label(const CoupledSystem& sys, double scale) {
  if (sys.qudit1.n_levels < 3) return "none";
  std::string label = "eta2=" + format_short(sys.qudit1.anharmonicity(2));
  if (scale != 1.0) label += "(x" + format_short(scale) + ")";
  return label;
}

std::vector<std::string> comments(const RunConfig& config) {
  return {timestamp_comment(), "config=" + config.name + " hash=" + config_hash(config)};
}

}  // namespace

CommandReport cmd_grape_sweep(const RunConfig& config, const std::string& out_dir) {
  validate(config);
  CsvTable runs({"T_over_T0", "T_abs", "levels", "gamma_set", "eta_scale", "best_F", "restart_id", "seed",
                 "distribution", "warm_start", "iterations", "n_steps"});
  CsvTable curve({"T_over_T0", "T_abs", "levels", "gamma_set", "eta_scale", "best_F", "n_steps"});
  json timing = json::array();
  std::vector<std::pair<std::string, std::string>> pulse_files;
  CommandReport report;
  const std::string hash = config_hash(config);

  SweepOptions opts;
  opts.restarts = config.grape.restarts;
  opts.warm_start = config.grape.warm_start;
  opts.workers = config.workers;

  for (int levels : config.levels) {
    for (std::size_t li = 0; li < config.loss_sets.size(); ++li) {
      const LossSet& set = config.loss_sets[li];
      const LossSpec loss = set.materialize(levels);
      for (std::size_t ei = 0; ei < config.eta_scales.size(); ++ei) {
        const double scale = config.eta_scales[ei];
        const CoupledSystem sys = config.system(levels, scale);
        const GateTarget target = embed_cnot_target(sys);
        const double t0 = sys.t0();
        const SweepResult res =
            sweep_gate_time(sys, loss, target, config.grape.t_over_t0, config.grape.optimizer, config.grape.steps, opts);
        const std::string gamma = set.display_label();
        for (const SweepRun& r : res.runs) {
          runs.add_row({format_exact(r.t_over_t0), format_exact(r.t_over_t0 * t0), std::to_string(levels), gamma,
                        format_exact(scale), format_exact(r.fidelity), std::to_string(r.restart_id),
                        std::to_string(r.seed), to_string(r.distribution), r.warm_started ? "1" : "0",
                        std::to_string(r.iterations), std::to_string(r.n_steps)});
          timing.push_back({{"levels", levels}, {"gamma_set", gamma}, {"eta_scale", scale},
                            {"T_over_T0", r.t_over_t0}, {"restart_id", r.restart_id},
                            {"wall_seconds", r.wall_seconds}});
        }
        for (const SweepPoint& p : res.curve) {
          curve.add_row({format_exact(p.t_over_t0), format_exact(p.t_over_t0 * t0), std::to_string(levels), gamma,
                         format_exact(scale), format_exact(p.best_fidelity),
                         std::to_string(p.best_pulses.n_steps())});
          report.summary.push_back({p.t_over_t0, p.best_fidelity});
          if (config.output.pulses && p.best_pulses.n_steps() > 0) {
            PulseFileMeta meta{config.grape.optimizer.seed, hash, p.t_over_t0, sys, loss};
            const std::string name = "grape_L" + std::to_string(levels) + "_loss" + std::to_string(li) + "_eta" +
                                     tag(scale) + "_T" + tag(p.t_over_t0) + ".csv";
            pulse_files.emplace_back(name, pulse_file_text(p.best_pulses, meta));
          }
        }
      }
    }
  }

  ensure_dir(out_dir);
  const auto head = comments(config);
  const std::string runs_path = join_path(out_dir, "grape_runs.csv");
  const std::string curve_path = join_path(out_dir, "grape_curve.csv");
  write_file_atomic(runs_path, runs.str(head));
  write_file_atomic(curve_path, curve.str(head));
  report.files = {runs_path, curve_path};
  if (!pulse_files.empty()) {
    const std::string pdir = join_path(out_dir, "pulses");
    ensure_dir(pdir);
    for (const auto& [name, text] : pulse_files) {
      const std::string path = join_path(pdir, name);
      write_file_atomic(path, text);
      report.files.push_back(path);
    }
  }
  json manifest = {{"schema_version", kSchemaVersion},
                   {"command", "grape-sweep"},
                   {"config_hash", hash},
                   {"seed", config.grape.optimizer.seed},
                   {"config", json::parse(to_json(config))},
                   {"timing", timing}};
  const std::string manifest_path = join_path(out_dir, "manifest-grape.json");
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  report.files.push_back(manifest_path);
  return report;
}

CommandReport cmd_crsd_scan(const RunConfig& config, const std::string& out_dir) {
  validate(config);
  CsvTable gates({"eps_max", "eta_label", "levels", "gamma_set", "darkening_mode", "gate_time_over_T0",
                  "speed_T0_over_T", "gate_fidelity", "T_abs", "ratio", "qualified", "estimated_duration_over_T0"});
  CsvTable scans({"eps_max", "eta_label", "levels", "gamma_set", "darkening_mode", "duration_over_T0", "fidelity"});
  CommandReport report;

  ScanOptions scan = config.crsd.scan;
  scan.workers = config.workers;
  std::vector<std::optional<double>> eta2s;
  for (double v : config.crsd.eta2_values) eta2s.emplace_back(v);
  if (eta2s.empty()) eta2s.emplace_back(std::nullopt);

  for (int levels : config.levels) {
    for (const LossSet& set : config.loss_sets) {
      const LossSpec loss = set.materialize(levels);
      const std::string gamma = set.display_label();
      for (double scale : config.eta_scales) {
        for (std::size_t vi = 0; vi < eta2s.size(); ++vi) {
          if (levels < 3 && vi > 0) continue;  // no state 2 to vary
          const auto& eta2 = eta2s[vi];
          CoupledSystem sys = config.system(levels, scale);
          if (eta2 && levels >= 3) {
            for (QuditSpec* q : {&sys.qudit1, &sys.qudit2}) {
              if (q->anharmonicities.empty()) q->anharmonicities.resize(1, 0.0);
              q->anharmonicities[0] = *eta2;
            }
          }
          const std::string label = eta_label(sys, scale);
          const double t0 = sys.t0();
          for (DarkeningMode mode : config.crsd.darkening) {
            if (mode == DarkeningMode::Leakage && levels < 3) {
              throw ConfigError("crsd.darkening: leakage mode needs at least 3 levels");
            }
            const double ratio = mode_ratio(sys, mode);
            for (double eps : config.crsd.eps_max) {
              const ScanResult r = scan_durations(sys, loss, eps, ratio, scan);
              const double gt = r.gate_time ? *r.gate_time : std::numeric_limits<double>::quiet_NaN();
              gates.add_row({format_exact(eps), label, std::to_string(levels), gamma, to_string(mode),
                             format_exact(gt / t0), format_exact(t0 / gt), format_exact(r.gate_fidelity),
                             format_exact(gt), format_exact(r.ratio), r.qualified ? "1" : "0",
                             format_exact(r.estimated_duration / t0)});
              for (std::size_t i = 0; i < r.durations.size(); ++i) {
                scans.add_row({format_exact(eps), label, std::to_string(levels), gamma, to_string(mode),
                               format_exact(r.durations[i] / t0), format_exact(r.fidelities[i])});
              }
              report.summary.push_back({eps, r.gate_fidelity});
            }
          }
        }
      }
    }
  }

  ensure_dir(out_dir);
  const auto head = comments(config);
  const std::string gates_path = join_path(out_dir, "crsd_gates.csv");
  const std::string scans_path = join_path(out_dir, "crsd_scans.csv");
  write_file_atomic(gates_path, gates.str(head));
  write_file_atomic(scans_path, scans.str(head));
  report.files = {gates_path, scans_path};
  return report;
}

std::vector<FilterSpec> default_filters() {
  return {FilterSpec{}, FilterSpec{std::nullopt, 1.3}, FilterSpec{0.5, std::nullopt}, FilterSpec{0.5, 1.3},
          FilterSpec{2.0, std::nullopt}};
}

CommandReport cmd_analyze(const std::string& pulse_path, const std::string& out_dir,
                          const AnalyzeOptions& options) {
  const PulseFile pf = read_pulse_file(pulse_path);
  const auto filters = options.filters.empty() ? default_filters() : options.filters;
  for (const auto& f : filters) validate(f);
  if (pf.pulses.n_steps() < 2) throw IoError("pulse file: need at least two steps for a spectrum");
  const CoupledSystem& sys = pf.meta.system;
  const LossSpec& loss = pf.meta.loss;
  CommandReport report;

  CsvTable spectrum({"channel", "omega", "abs", "re", "im"});
  CsvTable peaks({"channel", "peak_omega", "peak_abs", "band_peak_omega", "band_peak_abs", "band_ratio_to_u1"});
  const auto spectra = pulse_spectrum(pf.pulses);
  for (std::size_t k = 0; k < spectra.size(); ++k) {
    const auto& s = spectra[k].spectrum;
    for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
      if (s.frequencies[i] < 0.0) continue;
      const Complex c = s.coefficients[i];
      spectrum.add_row({"u" + std::to_string(k + 1), format_exact(s.frequencies[i]), format_exact(std::abs(c)),
                        format_exact(c.real()), format_exact(c.imag())});
    }
    const double base = spectra[0].band_peak_magnitude;
    const double ratio = base > 0.0 ? spectra[k].band_peak_magnitude / base : std::numeric_limits<double>::quiet_NaN();
    peaks.add_row({"u" + std::to_string(k + 1), format_exact(spectra[k].peak_frequency),
                   format_exact(spectra[k].peak_magnitude), format_exact(spectra[k].band_peak_frequency),
                   format_exact(spectra[k].band_peak_magnitude), format_exact(ratio)});
    report.summary.push_back({spectra[k].band_peak_frequency, spectra[k].band_peak_magnitude});
  }

  CsvTable pops({"t", "qubit", "second", "upper", "norm"});
  const PopulationReport pr = population_report(sys, loss, pf.pulses);
  for (std::size_t i = 0; i < pr.times.size(); ++i) {
    const auto& p = pr.populations;
    pops.add_row({format_exact(pr.times[i]), format_exact(p.qubit[i]), format_exact(p.second[i]),
                  format_exact(p.upper[i]), format_exact(p.qubit[i] + p.second[i] + p.upper[i])});
  }

  CsvTable table({"low_cut", "high_cut", "fidelity", "fidelity_change"});
  const GateTarget target = embed_cnot_target(sys);
  const double base = pulse_fidelity(Dynamics::build(sys, loss, pf.pulses.dt), pf.pulses, target);
  const auto edge = [](const std::optional<double>& x) { return x ? format_exact(*x) : std::string("none"); };
  for (const auto& ff : filtered_fidelities(sys, loss, pf.pulses, filters)) {
    table.add_row({edge(ff.spec.low_cut), edge(ff.spec.high_cut), format_exact(ff.fidelity),
                   format_exact(ff.fidelity - base)});
  }

  ensure_dir(out_dir);
  const std::vector<std::string> head = {timestamp_comment(), "source_hash=" + pf.meta.config_hash};
  const std::vector<std::pair<std::string, const CsvTable*>> outputs = {
      {"spectrum.csv", &spectrum}, {"peaks.csv", &peaks}, {"populations.csv", &pops}, {"filters.csv", &table}};
  for (const auto& [name, t] : outputs) {
    const std::string path = join_path(out_dir, name);
    write_file_atomic(path, t->str(head));
    report.files.push_back(path);
  }
  return report;
}

}  // namespace qsl
