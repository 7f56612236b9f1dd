#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rrdc/schemes.hpp"

namespace rrdc::cli {

enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

struct RunConfig {
  std::string problem = "neumann-slanted";
  Scheme scheme = Scheme::Correction;
  std::optional<double> dt;
  std::vector<int> levels;
  std::optional<double> alpha;
  std::string out_dir;
  std::string format;  // csv, md or json; empty picks the command default
  int threads = 1;
  bool dump_states = false;
};

/// "k0..k1" (inclusive) or a comma-separated list.
std::vector<int> parse_levels(const std::string& text);

/// Throws std::invalid_argument describing the first violated constraint.
void validate_for_run(const RunConfig& config);
void validate_for_study(const RunConfig& config);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_diagnose(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rrdc::cli
