#include "qsl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qsl {

using nlohmann::json;

namespace {

std::string format_rate(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Reads one JSON object, remembering its path for diagnostics and rejecting
// keys nobody asked for.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw ConfigError(field + ": " + what);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, field(key));
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) out = as_int(*v, field(key));
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
        fail(field(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) out = as_numbers(*v, field(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(where, "must be finite");
    return x;
  }

  static int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) fail(where, "out of range");
    return static_cast<int>(x);
  }

  static std::vector<double> as_numbers(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_system(const json& node, RunConfig& c) {
  Reader r(node, "system");
  if (const json* v = r.find("levels")) {
    c.levels.clear();
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        c.levels.push_back(Reader::as_int((*v)[i], "system.levels[" + std::to_string(i) + "]"));
      }
    } else {
      c.levels.push_back(Reader::as_int(*v, "system.levels"));
    }
  }
  if (const json* v = r.find("omega1")) {
    const auto w = Reader::as_numbers(*v, "system.omega1");
    if (w.size() != 2) Reader::fail("system.omega1", "expected two values (qudit 1, qudit 2)");
    c.omega1_1 = w[0];
    c.omega1_2 = w[1];
  }
  r.number("g", c.g);
  if (const json* v = r.find("anharmonicities")) {
    if (v->is_object()) {
      Reader a(*v, "system.anharmonicities");
      a.numbers("qudit1", c.anharmonicities1);
      a.numbers("qudit2", c.anharmonicities2);
      a.finish();
    } else {
      c.anharmonicities1 = Reader::as_numbers(*v, "system.anharmonicities");
      c.anharmonicities2 = c.anharmonicities1;
    }
  }
  r.numbers("eta_scales", c.eta_scales);
  r.finish();
}

LossSet read_loss_set(const json& node, const std::string& path) {
  Reader r(node, path);
  LossSet s;
  r.string("label", s.label);
  if (const json* v = r.find("top")) {
    const auto t = Reader::as_numbers(*v, r.field("top"));
    if (t.size() != 2) Reader::fail(r.field("top"), "expected [second-highest, highest] rates");
    s.top = std::make_pair(t[0], t[1]);
  }
  r.numbers("gamma1", s.gamma1);
  r.numbers("gamma2", s.gamma2);
  r.finish();
  if (s.top && (!s.gamma1.empty() || !s.gamma2.empty())) {
    Reader::fail(path, "give either top or gamma1/gamma2, not both");
  }
  return s;
}

void read_loss(const json& node, RunConfig& c) {
  c.loss_sets.clear();
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      c.loss_sets.push_back(read_loss_set(node[i], "loss[" + std::to_string(i) + "]"));
    }
  } else {
    c.loss_sets.push_back(read_loss_set(node, "loss"));
  }
}

void read_grape(const json& node, RunConfig& c) {
  Reader r(node, "grape");
  auto& g = c.grape;
  auto& o = g.optimizer;
  r.numbers("t_over_t0", g.t_over_t0);
  r.integer("restarts", g.restarts);
  r.boolean("warm_start", g.warm_start);
  r.integer("iterations", o.iterations);
  r.seed("seed", o.seed);
  if (const json* v = r.find("init_distribution")) {
    if (!v->is_string()) Reader::fail("grape.init_distribution", "expected a string");
    const auto d = parse_distribution(v->get<std::string>());
    if (!d) Reader::fail("grape.init_distribution", "unknown distribution '" + v->get<std::string>() + "'");
    o.init_distribution = *d;
  }
  r.integer("record_every", o.record_every);
  std::string text;
  if (r.find("gradient")) {
    r.string("gradient", text);
    if (text == "first_order") o.gradient = GradientMode::FirstOrder;
    else if (text == "exact") o.gradient = GradientMode::Exact;
    else Reader::fail("grape.gradient", "expected first_order or exact");
  }
  if (r.find("update")) {
    r.string("update", text);
    if (text == "steepest") o.update = UpdateRule::Steepest;
    else if (text == "lbfgs") o.update = UpdateRule::Lbfgs;
    else Reader::fail("grape.update", "expected steepest or lbfgs");
  }
  r.integer("lbfgs_memory", o.lbfgs_memory);
  r.number("stop_fidelity", o.stop_fidelity);
  r.integer("max_stalls", o.max_stalls);
  r.boolean("log_objective", o.log_objective);
  if (const json* v = r.find("step_rule")) {
    Reader s(*v, "grape.step_rule");
    s.number("initial_step", o.step_rule.initial_step);
    s.number("backtrack", o.step_rule.backtrack);
    s.number("growth", o.step_rule.growth);
    s.finish();
  }
  r.number("max_dt", g.steps.max_dt);
  r.integer("min_steps", g.steps.min_steps);
  r.finish();
}

void read_crsd(const json& node, RunConfig& c) {
  Reader r(node, "crsd");
  auto& s = c.crsd;
  r.numbers("eps_max", s.eps_max);
  if (const json* v = r.find("darkening")) {
    s.darkening.clear();
    const auto one = [&](const json& item, const std::string& where) {
      if (!item.is_string()) Reader::fail(where, "expected a string");
      const auto m = parse_darkening(item.get<std::string>());
      if (!m) Reader::fail(where, "expected computational or leakage");
      s.darkening.push_back(*m);
    };
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) one((*v)[i], "crsd.darkening[" + std::to_string(i) + "]");
    } else {
      one(*v, "crsd.darkening");
    }
  }
  r.numbers("eta2_values", s.eta2_values);
  r.integer("n_points", s.scan.n_points);
  r.number("ceiling", s.scan.ceiling);
  r.number("max_dt", s.scan.max_dt);
  r.number("carrier", s.scan.carrier);
  r.boolean("dressed_frame", s.scan.dressed_frame);
  r.integer("local_starts", s.scan.local.starts);
  r.number("local_tolerance", s.scan.local.tolerance);
  r.integer("local_max_evaluations", s.scan.local.max_evaluations);
  r.seed("local_seed", s.scan.local.seed);
  r.finish();
}

void read_output(const json& node, RunConfig& c) {
  Reader r(node, "output");
  r.string("directory", c.output.directory);
  r.boolean("pulses", c.output.pulses);
  r.finish();
}

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::llround((to - from) / step));
  for (int i = 0; i <= n; ++i) out.push_back(std::round((from + i * step) * 1e9) / 1e9);
  return out;
}

LossSet top_pair(double a, double b) {
  LossSet s;
  s.top = std::make_pair(a, b);
  return s;
}

RunConfig base_preset(const std::string& name) {
  RunConfig c;
  c.name = name;
  auto& o = c.grape.optimizer;
  o.iterations = 10000;
  o.update = UpdateRule::Lbfgs;
  o.gradient = GradientMode::Exact;
  o.record_every = 100;
  o.seed = 20200101;
  c.grape.restarts = 4;
  return c;
}

const std::map<std::string, std::function<RunConfig()>>& preset_table() {
  static const std::map<std::string, std::function<RunConfig()>> table = {
      {"fig1a",
       [] {
         RunConfig c = base_preset("fig1a");
         c.levels = {2, 3, 4, 5};
         c.grape.t_over_t0 = grid(0.1, 1.5, 0.1);
         return c;
       }},
      {"fig2a",
       [] {
         RunConfig c = base_preset("fig2a");
         c.levels = {4};
         c.loss_sets = {top_pair(0, 1e-2), top_pair(0, 1e-1), top_pair(0, 1), top_pair(1e-3, 1e-1),
                        top_pair(1e-2, 1e-1)};
         c.grape.t_over_t0 = grid(1, 10, 1);
         c.grape.optimizer.log_objective = true;
         return c;
       }},
      {"fig4",
       [] {
         RunConfig c = base_preset("fig4");
         c.levels = {4};
         c.eta_scales = {0, 0.25, 0.5, 0.75, 1, 2};
         c.loss_sets = {top_pair(0, 1e-2)};
         c.grape.t_over_t0 = grid(1, 12, 1);
         c.grape.optimizer.log_objective = true;
         return c;
       }},
      {"fig5",
       [] {
         RunConfig c = base_preset("fig5");
         c.levels = {3, 4};
         c.eta_scales = {1, 2, 0.5};
         c.crsd.eps_max = grid(0.0, 0.2, 0.01);
         return c;
       }},
      {"fig6",
       [] {
         RunConfig c = base_preset("fig6");
         c.levels = {4};
         c.loss_sets = {top_pair(0, 1e-2)};
         c.eta_scales = {1, 2, 0.5};
         c.crsd.darkening = {DarkeningMode::Computational, DarkeningMode::Leakage};
         c.crsd.eps_max = grid(0.0, 0.1, 0.005);
         return c;
       }},
  };
  return table;
}

json loss_set_json(const LossSet& s) {
  json j;
  j["label"] = s.label;
  if (s.top) {
    j["top"] = {s.top->first, s.top->second};
  } else {
    j["gamma1"] = s.gamma1;
    j["gamma2"] = s.gamma2;
  }
  return j;
}

const char* gradient_name(GradientMode m) { return m == GradientMode::Exact ? "exact" : "first_order"; }
const char* update_name(UpdateRule u) { return u == UpdateRule::Lbfgs ? "lbfgs" : "steepest"; }

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

LossSpec LossSet::materialize(int levels) const {
  LossSpec spec;
  if (top) {
    spec.gamma1.assign(static_cast<std::size_t>(levels), 0.0);
    if (levels >= 2) spec.gamma1[static_cast<std::size_t>(levels - 2)] = top->first;
    spec.gamma1[static_cast<std::size_t>(levels - 1)] = top->second;
    spec.gamma2 = spec.gamma1;
  } else {
    spec.gamma1 = gamma1;
    spec.gamma2 = gamma2;
  }
  return spec;
}

std::string LossSet::display_label() const {
  if (!label.empty()) return label;
  if (top) return format_rate(top->first) + "/" + format_rate(top->second);
  const auto all_zero = [](const std::vector<double>& v) {
    for (double x : v) if (x != 0.0) return false;
    return true;
  };
  if (all_zero(gamma1) && all_zero(gamma2)) return "none";
  std::string out;
  for (std::size_t i = 0; i < gamma1.size(); ++i) out += (i ? ";" : "") + format_rate(gamma1[i]);
  out += "|";
  for (std::size_t i = 0; i < gamma2.size(); ++i) out += (i ? ";" : "") + format_rate(gamma2[i]);
  return out;
}

CoupledSystem RunConfig::system(int levels, double eta_scale) const {
  CoupledSystem sys;
  sys.g = g;
  sys.qudit1 = {levels, omega1_1, anharmonicities1};
  sys.qudit2 = {levels, omega1_2, anharmonicities2};
  for (double& x : sys.qudit1.anharmonicities) x *= eta_scale;
  for (double& x : sys.qudit2.anharmonicities) x *= eta_scale;
  return sys;
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  RunConfig c;
  if (root.is_object() && root.contains("preset")) {
    if (!root["preset"].is_string()) Reader::fail("preset", "expected a string");
    c = preset(root["preset"].get<std::string>());
  }
  Reader r(root, "");
  r.find("preset");
  r.string("name", c.name);
  if (const json* v = r.find("system")) read_system(*v, c);
  if (const json* v = r.find("loss")) read_loss(*v, c);
  if (const json* v = r.find("grape")) read_grape(*v, c);
  if (const json* v = r.find("crsd")) read_crsd(*v, c);
  if (const json* v = r.find("output")) read_output(*v, c);
  r.integer("workers", c.workers);
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig preset(const std::string& name) {
  const bool desk = name.size() > 5 && name.compare(name.size() - 5, 5, "-desk") == 0;
  const std::string base = desk ? name.substr(0, name.size() - 5) : name;
  const auto& table = preset_table();
  const auto it = table.find(base);
  if (it == table.end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("preset: unknown name '" + name + "' (known: " + known + ")");
  }
  RunConfig c = it->second();
  if (desk) {
    c.name = name;
    apply_desk_scale(c);
  }
  return c;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : preset_table()) {
    out.push_back(name);
    out.push_back(name + "-desk");
  }
  return out;
}

void apply_desk_scale(RunConfig& c) {
  auto& o = c.grape.optimizer;
  o.iterations = std::min(o.iterations, 2000);
  if (c.grape.steps.max_dt <= 0.0) c.grape.steps.max_dt = 0.5;
  c.crsd.scan.local.starts = std::min(c.crsd.scan.local.starts, 8);
}

void validate(const RunConfig& c) {
  check(!c.levels.empty(), "system.levels", "needs at least one entry");
  for (std::size_t i = 0; i < c.levels.size(); ++i) {
    check(c.levels[i] >= 2 && c.levels[i] <= 5, "system.levels[" + std::to_string(i) + "]",
          "must be between 2 and 5");
  }
  check(c.omega1_1 > 0.0 && c.omega1_2 > 0.0, "system.omega1", "frequencies must be > 0");
  check(c.g > 0.0, "system.g", "must be > 0");
  check(!c.eta_scales.empty(), "system.eta_scales", "needs at least one entry");
  check(!c.loss_sets.empty(), "loss", "needs at least one entry");
  for (int levels : c.levels) {
    for (double scale : c.eta_scales) {
      const CoupledSystem sys = c.system(levels, scale);
      try {
        validate(sys);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("system: ") + e.what());
      }
      for (std::size_t i = 0; i < c.loss_sets.size(); ++i) {
        const LossSet& s = c.loss_sets[i];
        const std::string where = "loss[" + std::to_string(i) + "]";
        if (!s.top) {
          check(s.gamma1.size() <= static_cast<std::size_t>(levels) &&
                    s.gamma2.size() <= static_cast<std::size_t>(levels),
                where, "more rates than levels (" + std::to_string(levels) + ")");
        }
        try {
          validate(s.materialize(levels), sys);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(where + ": " + e.what());
        }
      }
    }
  }
  const auto& g = c.grape;
  for (std::size_t i = 0; i < g.t_over_t0.size(); ++i) {
    check(g.t_over_t0[i] >= 0.0, "grape.t_over_t0[" + std::to_string(i) + "]", "must be >= 0");
  }
  check(g.restarts >= 1, "grape.restarts", "must be >= 1");
  check(g.optimizer.iterations >= 1, "grape.iterations", "must be >= 1");
  check(g.optimizer.record_every >= 1, "grape.record_every", "must be >= 1");
  check(g.optimizer.lbfgs_memory >= 1, "grape.lbfgs_memory", "must be >= 1");
  check(g.optimizer.max_stalls >= 1, "grape.max_stalls", "must be >= 1");
  check(g.optimizer.stop_fidelity > 0.0 && g.optimizer.stop_fidelity <= 1.0, "grape.stop_fidelity",
        "must be in (0, 1]");
  const auto& sr = g.optimizer.step_rule;
  check(sr.initial_step > 0.0, "grape.step_rule.initial_step", "must be > 0");
  check(sr.backtrack > 0.0 && sr.backtrack < 1.0, "grape.step_rule.backtrack", "must be in (0, 1)");
  check(sr.growth >= 1.0, "grape.step_rule.growth", "must be >= 1");
  check(g.steps.min_steps >= 1, "grape.min_steps", "must be >= 1");
  const auto& s = c.crsd;
  for (std::size_t i = 0; i < s.eps_max.size(); ++i) {
    check(s.eps_max[i] >= 0.0, "crsd.eps_max[" + std::to_string(i) + "]", "must be >= 0");
  }
  check(!s.darkening.empty(), "crsd.darkening", "needs at least one mode");
  check(s.scan.n_points >= 2, "crsd.n_points", "must be >= 2");
  check(s.scan.ceiling > 0.0, "crsd.ceiling", "must be > 0");
  check(s.scan.max_dt > 0.0, "crsd.max_dt", "must be > 0");
  check(s.scan.local.starts >= 1, "crsd.local_starts", "must be >= 1");
  check(s.scan.local.tolerance > 0.0, "crsd.local_tolerance", "must be > 0");
  check(s.scan.local.max_evaluations >= 1, "crsd.local_max_evaluations", "must be >= 1");
  check(!c.output.directory.empty(), "output.directory", "must not be empty");
  check(c.workers >= 1, "workers", "must be >= 1");
}

std::string to_json(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["system"] = {{"levels", c.levels},
                 {"omega1", {c.omega1_1, c.omega1_2}},
                 {"g", c.g},
                 {"anharmonicities", {{"qudit1", c.anharmonicities1}, {"qudit2", c.anharmonicities2}}},
                 {"eta_scales", c.eta_scales}};
  j["loss"] = json::array();
  for (const auto& s : c.loss_sets) j["loss"].push_back(loss_set_json(s));
  const auto& o = c.grape.optimizer;
  j["grape"] = {{"t_over_t0", c.grape.t_over_t0},
                {"restarts", c.grape.restarts},
                {"warm_start", c.grape.warm_start},
                {"iterations", o.iterations},
                {"seed", o.seed},
                {"init_distribution", to_string(o.init_distribution)},
                {"record_every", o.record_every},
                {"gradient", gradient_name(o.gradient)},
                {"update", update_name(o.update)},
                {"lbfgs_memory", o.lbfgs_memory},
                {"stop_fidelity", o.stop_fidelity},
                {"max_stalls", o.max_stalls},
                {"log_objective", o.log_objective},
                {"step_rule",
                 {{"initial_step", o.step_rule.initial_step},
                  {"backtrack", o.step_rule.backtrack},
                  {"growth", o.step_rule.growth}}},
                {"max_dt", c.grape.steps.max_dt},
                {"min_steps", c.grape.steps.min_steps}};
  json modes = json::array();
  for (auto m : c.crsd.darkening) modes.push_back(to_string(m));
  const auto& sc = c.crsd.scan;
  j["crsd"] = {{"eps_max", c.crsd.eps_max},
               {"darkening", modes},
               {"eta2_values", c.crsd.eta2_values},
               {"n_points", sc.n_points},
               {"ceiling", sc.ceiling},
               {"max_dt", sc.max_dt},
               {"carrier", sc.carrier},
               {"dressed_frame", sc.dressed_frame},
               {"local_starts", sc.local.starts},
               {"local_tolerance", sc.local.tolerance},
               {"local_max_evaluations", sc.local.max_evaluations},
               {"local_seed", sc.local.seed}};
  j["output"] = {{"directory", c.output.directory}, {"pulses", c.output.pulses}};
  j["workers"] = c.workers;
  return j.dump(2);
}

std::string config_hash(const RunConfig& c) {
  // Output location and worker count do not change results.
  RunConfig copy = c;
  copy.output.directory = ".";
  copy.workers = 1;
  const std::string text = to_json(copy);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qsl
