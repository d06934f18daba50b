#include "qsl/qsl.h"

#include <cmath>
#include <functional>
#include <new>
#include <string>

#include "qsl/commands.hpp"
#include "qsl/config.hpp"
#include "qsl/records.hpp"

struct qsl_config {
  qsl::RunConfig config;
  std::string json_cache;
};

struct qsl_report {
  qsl::CommandReport report;
};

namespace {

thread_local std::string g_last_error;

qsl_status fail(qsl_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Maps exceptions from the core onto status codes.
template <typename Fn>
qsl_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return QSL_OK;
  } catch (const qsl::ConfigError& e) {
    return fail(QSL_ERR_CONFIG, e.what());
  } catch (const qsl::IoError& e) {
    return fail(QSL_ERR_IO, e.what());
  } catch (const qsl::NumericalError& e) {
    return fail(QSL_ERR_NUMERICAL, e.what());
  } catch (const std::domain_error& e) {
    return fail(QSL_ERR_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(QSL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QSL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QSL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QSL_ERR_INTERNAL, "unknown error");
  }
}

qsl_status make_config(qsl_config** out, const std::function<qsl::RunConfig()>& build) {
  if (!out) return fail(QSL_ERR_INVALID_ARGUMENT, "out is null");
  *out = nullptr;
  return guarded([&] { *out = new qsl_config{build(), {}}; });
}

qsl_status emit(qsl_report** out, qsl::CommandReport&& r) {
  if (out) *out = new qsl_report{std::move(r)};
  return QSL_OK;
}

}  // namespace

extern "C" {

const char* qsl_version(void) { return "1.0.0"; }

const char* qsl_last_error(void) { return g_last_error.c_str(); }

qsl_status qsl_config_from_file(const char* path, qsl_config** out) {
  if (!path) return fail(QSL_ERR_INVALID_ARGUMENT, "path is null");
  return make_config(out, [&] { return qsl::load_config(path); });
}

qsl_status qsl_config_from_json(const char* text, qsl_config** out) {
  if (!text) return fail(QSL_ERR_INVALID_ARGUMENT, "text is null");
  return make_config(out, [&] { return qsl::parse_config(text); });
}

qsl_status qsl_config_from_preset(const char* name, qsl_config** out) {
  if (!name) return fail(QSL_ERR_INVALID_ARGUMENT, "name is null");
  return make_config(out, [&] { return qsl::preset(name); });
}

void qsl_config_free(qsl_config* config) { delete config; }

qsl_status qsl_config_set_seed(qsl_config* config, uint64_t seed) {
  if (!config) return fail(QSL_ERR_INVALID_ARGUMENT, "config is null");
  config->config.grape.optimizer.seed = seed;
  config->config.crsd.scan.local.seed = seed;
  return QSL_OK;
}

qsl_status qsl_config_set_workers(qsl_config* config, int workers) {
  if (!config) return fail(QSL_ERR_INVALID_ARGUMENT, "config is null");
  if (workers < 1) return fail(QSL_ERR_CONFIG, "workers: must be >= 1");
  config->config.workers = workers;
  return QSL_OK;
}

qsl_status qsl_config_set_output_dir(qsl_config* config, const char* dir) {
  if (!config || !dir) return fail(QSL_ERR_INVALID_ARGUMENT, "config or dir is null");
  if (!*dir) return fail(QSL_ERR_CONFIG, "output.directory: must not be empty");
  config->config.output.directory = dir;
  return QSL_OK;
}

qsl_status qsl_config_apply_desk_scale(qsl_config* config) {
  if (!config) return fail(QSL_ERR_INVALID_ARGUMENT, "config is null");
  qsl::apply_desk_scale(config->config);
  return QSL_OK;
}

const char* qsl_config_output_dir(const qsl_config* config) {
  return config ? config->config.output.directory.c_str() : "";
}

const char* qsl_config_json(qsl_config* config) {
  if (!config) return "";
  config->json_cache = qsl::to_json(config->config);
  return config->json_cache.c_str();
}

qsl_status qsl_run_grape_sweep(const qsl_config* config, const char* out_dir, qsl_report** out) {
  if (!config) return fail(QSL_ERR_INVALID_ARGUMENT, "config is null");
  if (out) *out = nullptr;
  qsl::CommandReport r;
  const std::string dir = out_dir ? out_dir : config->config.output.directory;
  const qsl_status s = guarded([&] { r = qsl::cmd_grape_sweep(config->config, dir); });
  return s == QSL_OK ? emit(out, std::move(r)) : s;
}

qsl_status qsl_run_crsd_scan(const qsl_config* config, const char* out_dir, qsl_report** out) {
  if (!config) return fail(QSL_ERR_INVALID_ARGUMENT, "config is null");
  if (out) *out = nullptr;
  qsl::CommandReport r;
  const std::string dir = out_dir ? out_dir : config->config.output.directory;
  const qsl_status s = guarded([&] { r = qsl::cmd_crsd_scan(config->config, dir); });
  return s == QSL_OK ? emit(out, std::move(r)) : s;
}

qsl_status qsl_analyze(const char* pulse_path, const char* out_dir, const double* cuts, size_t n_filters,
                       qsl_report** out) {
  if (!pulse_path || !out_dir) return fail(QSL_ERR_INVALID_ARGUMENT, "pulse_path or out_dir is null");
  if (n_filters > 0 && !cuts) return fail(QSL_ERR_INVALID_ARGUMENT, "cuts is null");
  if (out) *out = nullptr;
  qsl::AnalyzeOptions opts;
  for (size_t i = 0; i < n_filters; ++i) {
    qsl::FilterSpec f;
    if (!std::isnan(cuts[2 * i])) f.low_cut = cuts[2 * i];
    if (!std::isnan(cuts[2 * i + 1])) f.high_cut = cuts[2 * i + 1];
    opts.filters.push_back(f);
  }
  qsl::CommandReport r;
  const qsl_status s = guarded([&] { r = qsl::cmd_analyze(pulse_path, out_dir, opts); });
  return s == QSL_OK ? emit(out, std::move(r)) : s;
}

size_t qsl_report_points(const qsl_report* report) { return report ? report->report.summary.size() : 0; }

qsl_status qsl_report_point(const qsl_report* report, size_t index, double* x, double* y) {
  if (!report || index >= report->report.summary.size()) {
    return fail(QSL_ERR_INVALID_ARGUMENT, "report index out of range");
  }
  if (x) *x = report->report.summary[index].x;
  if (y) *y = report->report.summary[index].y;
  return QSL_OK;
}

size_t qsl_report_files(const qsl_report* report) { return report ? report->report.files.size() : 0; }

const char* qsl_report_file(const qsl_report* report, size_t index) {
  if (!report || index >= report->report.files.size()) return nullptr;
  return report->report.files[index].c_str();
}

void qsl_report_free(qsl_report* report) { delete report; }

qsl_status qsl_darkening_ratio(int levels, double eta2, qsl_darkening mode, double* out) {
  if (!out) return fail(QSL_ERR_INVALID_ARGUMENT, "out is null");
  if (mode != QSL_DARKEN_COMPUTATIONAL && mode != QSL_DARKEN_LEAKAGE) {
    return fail(QSL_ERR_INVALID_ARGUMENT, "unknown darkening mode");
  }
  return guarded([&] {
    if (levels < 2 || levels > 5) throw std::invalid_argument("levels must be between 2 and 5");
    qsl::CoupledSystem sys = qsl::reference_system(levels);
    if (levels >= 3) {
      sys.qudit1.anharmonicities[0] = eta2;
      sys.qudit2.anharmonicities[0] = eta2;
    }
    *out = qsl::mode_ratio(sys, mode == QSL_DARKEN_LEAKAGE ? qsl::DarkeningMode::Leakage
                                                            : qsl::DarkeningMode::Computational);
  });
}

}  // extern "C"
