#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsl/model.hpp"
#include "qsl/propagator.hpp"

namespace qsl {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form.
std::string format_exact(double x);
/// Compact form for human-facing columns.
std::string format_short(double x);

/// Comma-separated table with a fixed header. Fields are never quoted, so
/// callers keep commas out of them.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  /// `comment` lines are emitted first, each prefixed with "# ".
  std::string str(const std::vector<std::string>& comment = {}) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Write through a temporary file and rename, so readers never see a partial
/// file.
void write_file_atomic(const std::string& path, const std::string& content);

/// "# generated <UTC time>"; the only run-dependent line in any output.
std::string timestamp_comment();

struct PulseFileMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  double t_over_t0 = 0.0;
  CoupledSystem system;
  LossSpec loss;
};

struct PulseFile {
  PulseSet pulses;
  PulseFileMeta meta;
};

/// Header comment block (format, dt, N, seed, hash, system, loss) then
/// step_index,t,u1,u2 rows. t is the start time of each step.
std::string pulse_file_text(const PulseSet& pulses, const PulseFileMeta& meta);

/// Throws IoError if the file is missing or malformed.
PulseFile read_pulse_file(const std::string& path);

}  // namespace qsl
