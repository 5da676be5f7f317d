#pragma once

#include <string>
#include <vector>

#include "flagsim/io.hpp"
#include "flagsim/stats.hpp"

namespace flagsim {

struct RunReport {
  ExperimentConfig config;
  std::vector<TestVerdict> verdicts;
  std::vector<std::string> artifacts;  // files written, report included
  double wall_seconds = 0.0;
  bool all_pass() const;
};

// Registered experiment names, in registry order.
const std::vector<std::string>& experiment_names();

// Runs one experiment: validates the config, simulates, writes the report
// and data files into the output directory, returns the verdicts.
// Unknown experiment names and invalid configs throw std::invalid_argument.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace flagsim
