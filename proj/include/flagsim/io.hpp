#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flagsim/stats.hpp"

namespace flagsim {

// Flat key=value settings with explicit-presence semantics: defaults live at
// the point of use, so experiments can pin their own and overrides stay thin.
class ExperimentConfig {
 public:
  std::string experiment;
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  void set(const std::string& key, const std::string& value) {
    kv[key] = value;
  }

  std::string get_string(const std::string& key, const std::string& def) const;
  long get_long(const std::string& key, long def) const;
  double get_double(const std::string& key, double def) const;
  std::uint64_t get_seed(std::uint64_t def) const;

  // Comma-separated reals, e.g. "0.5,2".
  Eigen::VectorXd get_vector(const std::string& key,
                             const Eigen::VectorXd& def) const;

  // Frequency grid: either "pm:a,b,..." (every sign/value combination over n
  // coordinates) or explicit vectors "u1,u2;u1,u2;...".
  std::vector<Eigen::VectorXd> get_grid(const std::string& key, int n,
                                        const std::string& def) const;

  // Output directory: "out" key, else the FLAGSIM_OUT environment variable,
  // else the current directory. Created if missing.
  std::string out_dir() const;
};

// Parses a flat key=value file ('#' comments, blank lines allowed).
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Parses "pm:..." or explicit ';'-separated vectors (standalone form).
std::vector<Eigen::VectorXd> parse_grid(const std::string& spec, int n);

// One verdict per line: name statistic threshold pass seed N.
void write_report(const std::string& path,
                  const std::vector<TestVerdict>& verdicts);

struct PlotData {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// '#'-prefixed header naming columns, space-delimited rows, floats at 17
// significant digits, LF line endings.
void emit_plot_data(const std::string& path,
                    const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows);

// Reader for the same format; used by round-trip checks.
PlotData read_plot_data(const std::string& path);

}  // namespace flagsim
