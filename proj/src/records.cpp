#include "qsl/records.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace qsl {

namespace {

constexpr const char* kPulseFormat = "qsl-pulses-v1";

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format_exact(v[i]);
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end) throw IoError("pulse file: bad number '" + text + "' in " + what);
  return x;
}

long long parse_integer(const std::string& text, const std::string& what) {
  long long x = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end) throw IoError("pulse file: bad integer '" + text + "' in " + what);
  return x;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(';', start);
    out.push_back(parse_double(text.substr(start, pos - start), what));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_exact(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string format_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("CsvTable: row width mismatch");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str(const std::vector<std::string>& comment) const {
  std::string out;
  for (const auto& c : comment) out += "# " + c + "\n";
  const auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
    out += "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

std::string timestamp_comment() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[64];
  std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string pulse_file_text(const PulseSet& pulses, const PulseFileMeta& meta) {
  if (pulses.channels() != 2) throw std::invalid_argument("pulse file: expected two channels");
  const auto& s = meta.system;
  std::string out;
  const auto kv = [&](const std::string& k, const std::string& v) { out += "# " + k + "=" + v + "\n"; };
  kv("format", kPulseFormat);
  kv("dt", format_exact(pulses.dt));
  kv("N", std::to_string(pulses.n_steps()));
  kv("seed", std::to_string(meta.seed));
  kv("config_hash", meta.config_hash);
  kv("t_over_t0", format_exact(meta.t_over_t0));
  kv("levels1", std::to_string(s.qudit1.n_levels));
  kv("levels2", std::to_string(s.qudit2.n_levels));
  kv("omega1", format_exact(s.qudit1.omega1) + ";" + format_exact(s.qudit2.omega1));
  kv("g", format_exact(s.g));
  kv("anharmonicities1", join(s.qudit1.anharmonicities));
  kv("anharmonicities2", join(s.qudit2.anharmonicities));
  kv("gamma1", join(meta.loss.gamma1));
  kv("gamma2", join(meta.loss.gamma2));
  out += "step_index,t,u1,u2\n";
  for (int j = 0; j < pulses.n_steps(); ++j) {
    out += std::to_string(j) + "," + format_exact(j * pulses.dt) + "," +
           format_exact(pulses.amplitudes(0, j)) + "," + format_exact(pulses.amplitudes(1, j)) + "\n";
  }
  return out;
}

PulseFile read_pulse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pulse file '" + path + "'");
  std::map<std::string, std::string> meta;
  std::string line;
  bool header_seen = false;
  std::vector<std::array<double, 2>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos && line.size() > 2) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!header_seen) {
      if (line != "step_index,t,u1,u2") throw IoError("pulse file: expected header step_index,t,u1,u2");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    const std::string where = "line " + std::to_string(line_no);
    if (f.size() != 4) throw IoError("pulse file: " + where + " needs 4 fields");
    if (parse_integer(f[0], where) != static_cast<long long>(rows.size())) {
      throw IoError("pulse file: " + where + " has out-of-order step_index");
    }
    rows.push_back({parse_double(f[2], where), parse_double(f[3], where)});
  }
  if (!header_seen) throw IoError("pulse file: missing header line");
  if (meta["format"] != kPulseFormat) throw IoError("pulse file: unsupported format '" + meta["format"] + "'");
  for (const char* key : {"dt", "N", "levels1", "levels2", "omega1", "g"}) {
    if (!meta.count(key)) throw IoError(std::string("pulse file: missing metadata '") + key + "'");
  }

  PulseFile pf;
  pf.pulses.dt = parse_double(meta["dt"], "dt");
  const long long n = parse_integer(meta["N"], "N");
  if (n != static_cast<long long>(rows.size())) throw IoError("pulse file: N does not match row count");
  if (!(pf.pulses.dt > 0.0)) throw IoError("pulse file: dt must be > 0");
  pf.pulses.amplitudes.resize(2, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    pf.pulses.amplitudes(0, static_cast<Eigen::Index>(j)) = rows[j][0];
    pf.pulses.amplitudes(1, static_cast<Eigen::Index>(j)) = rows[j][1];
  }
  auto& m = pf.meta;
  if (meta.count("seed")) {
    const std::string& t = meta["seed"];
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), m.seed);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw IoError("pulse file: bad seed '" + t + "'");
  }
  m.config_hash = meta["config_hash"];
  if (meta.count("t_over_t0")) m.t_over_t0 = parse_double(meta["t_over_t0"], "t_over_t0");
  const auto omega = split_numbers(meta["omega1"], "omega1");
  if (omega.size() != 2) throw IoError("pulse file: omega1 needs two values");
  m.system.qudit1 = {static_cast<int>(parse_integer(meta["levels1"], "levels1")), omega[0],
                     split_numbers(meta["anharmonicities1"], "anharmonicities1")};
  m.system.qudit2 = {static_cast<int>(parse_integer(meta["levels2"], "levels2")), omega[1],
                     split_numbers(meta["anharmonicities2"], "anharmonicities2")};
  m.system.g = parse_double(meta["g"], "g");
  m.loss.gamma1 = split_numbers(meta["gamma1"], "gamma1");
  m.loss.gamma2 = split_numbers(meta["gamma2"], "gamma2");
  try {
    validate(m.system);
    validate(m.loss, m.system);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("pulse file: ") + e.what());
  }
  return pf;
}

}  // namespace qsl
