// Command-line front end over the C interface.
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsl/qsl.h"

namespace {

int exit_code(qsl_status s) {
  switch (s) {
    case QSL_OK: return 0;
    case QSL_ERR_CONFIG: return 2;
    case QSL_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

int report_failure(qsl_status s) {
  std::fprintf(stderr, "error: %s\n", qsl_last_error());
  return exit_code(s);
}

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::string out;
  unsigned long long seed = 0;
  bool seed_given = false;
  int workers = 0;
  bool desk = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  auto* cfg = cmd->add_option("--config", f.config_path, "JSON run configuration");
  auto* pre = cmd->add_option("--preset", f.preset, "named parameter set (fig1a, fig2a, fig4, fig5, fig6, *-desk)");
  cfg->excludes(pre);
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "base random seed")->each([&f](const std::string&) { f.seed_given = true; });
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--desk-scale", f.desk, "reduced iteration budget");
}

// Builds the config handle; returns an exit code on failure.
int load(const RunFlags& f, qsl_config** cfg) {
  qsl_status s;
  if (!f.config_path.empty()) {
    s = qsl_config_from_file(f.config_path.c_str(), cfg);
  } else if (!f.preset.empty()) {
    s = qsl_config_from_preset(f.preset.c_str(), cfg);
  } else {
    s = qsl_config_from_json("{}", cfg);
  }
  if (s != QSL_OK) return report_failure(s);
  if (f.seed_given) qsl_config_set_seed(*cfg, f.seed);
  if (f.workers > 0) qsl_config_set_workers(*cfg, f.workers);
  if (f.desk) qsl_config_apply_desk_scale(*cfg);
  if (!f.out.empty() && (s = qsl_config_set_output_dir(*cfg, f.out.c_str())) != QSL_OK) {
    return report_failure(s);
  }
  return 0;
}

void print_report(const qsl_report* r, const char* x_name, const char* y_name) {
  std::printf("%s,%s\n", x_name, y_name);
  for (size_t i = 0; i < qsl_report_points(r); ++i) {
    double x = 0.0, y = 0.0;
    qsl_report_point(r, i, &x, &y);
    std::printf("%.6g,%.8g\n", x, y);
  }
  for (size_t i = 0; i < qsl_report_files(r); ++i) std::fprintf(stderr, "wrote %s\n", qsl_report_file(r, i));
}

using Runner = qsl_status (*)(const qsl_config*, const char*, qsl_report**);

int run(const RunFlags& f, Runner runner, const char* x_name, const char* y_name) {
  qsl_config* cfg = nullptr;
  if (const int rc = load(f, &cfg)) {
    qsl_config_free(cfg);
    return rc;
  }
  qsl_report* rep = nullptr;
  const qsl_status s = runner(cfg, nullptr, &rep);
  qsl_config_free(cfg);
  if (s != QSL_OK) return report_failure(s);
  print_report(rep, x_name, y_name);
  qsl_report_free(rep);
  return 0;
}

// "low:high" with either side optionally empty.
bool parse_filter(const std::string& text, double& low, double& high) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  const auto side = [](const std::string& s, double& v) {
    if (s.empty()) {
      v = std::numeric_limits<double>::quiet_NaN();
      return true;
    }
    try {
      size_t used = 0;
      v = std::stod(s, &used);
      return used == s.size();
    } catch (...) {
      return false;
    }
  };
  return side(text.substr(0, colon), low) && side(text.substr(colon + 1), high);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-qudit gate speed limits: GRAPE sweeps, CR/SD scans, pulse analysis"};
  app.set_version_flag("--version", std::string(qsl_version()));
  app.require_subcommand(1);

  RunFlags grape_flags, crsd_flags;
  auto* grape = app.add_subcommand("grape-sweep", "optimize pulses over a gate-time grid");
  add_run_flags(grape, grape_flags);
  auto* crsd = app.add_subcommand("crsd-scan", "simulate the CR/SD protocol over drive strengths");
  add_run_flags(crsd, crsd_flags);

  std::string pulse_path, analyze_out = "analysis";
  std::vector<std::string> filters;
  auto* analyze = app.add_subcommand("analyze", "spectrum, populations and filtered fidelity of a pulse file");
  analyze->add_option("pulses", pulse_path, "pulse CSV written by grape-sweep")->required();
  analyze->add_option("--out", analyze_out, "output directory");
  analyze->add_option("--filter", filters, "pass band low:high (either side may be empty); repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*grape) return run(grape_flags, qsl_run_grape_sweep, "T_over_T0", "best_F");
  if (*crsd) return run(crsd_flags, qsl_run_crsd_scan, "eps_max", "gate_fidelity");

  std::vector<double> cuts;
  for (const auto& f : filters) {
    double lo = 0.0, hi = 0.0;
    if (!parse_filter(f, lo, hi)) {
      std::fprintf(stderr, "error: --filter: expected low:high, got '%s'\n", f.c_str());
      return 2;
    }
    cuts.push_back(lo);
    cuts.push_back(hi);
  }
  qsl_report* rep = nullptr;
  const qsl_status s =
      qsl_analyze(pulse_path.c_str(), analyze_out.c_str(), cuts.empty() ? nullptr : cuts.data(), filters.size(), &rep);
  if (s != QSL_OK) return report_failure(s);
  print_report(rep, "band_peak_omega", "band_peak_abs");
  qsl_report_free(rep);
  return 0;
}
