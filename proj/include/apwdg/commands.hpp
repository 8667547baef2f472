#pragma once

#include <string>
#include <vector>

#include "apwdg/config.hpp"

namespace apwdg {

struct CommandOptions {
  std::string out_dir = ".";
  bool dump_matrices = false;
};

struct CommandReport {
  std::vector<std::string> files;     // artifacts written, relative to out_dir
  std::vector<std::string> warnings;
  std::vector<std::string> summary;   // short human-readable lines
};

// Subcommands: solve, converge, scf, inverse-estimate, line-plot.
// Each writes its CSV artifact plus run.json into opts.out_dir (created if missing).
CommandReport run_command(const std::string& command, const ProblemConfig& config, const CommandOptions& opts);

CommandReport run_solve(const ProblemConfig& config, const CommandOptions& opts);
CommandReport run_converge(const ProblemConfig& config, const CommandOptions& opts);
CommandReport run_scf(const ProblemConfig& config, const CommandOptions& opts);
CommandReport run_inverse_estimate(const ProblemConfig& config, const CommandOptions& opts);
CommandReport run_line_plot(const ProblemConfig& config, const CommandOptions& opts);

bool is_command(const std::string& command);

}  // namespace apwdg
