#pragma once

#include <string>
#include <vector>

#include "apwdg/experiments.hpp"

namespace apwdg {

struct InverseConfig {
  std::vector<int> varrho{4, 6, 8, 10, 12};
  std::vector<double> radii{0.5, 1.0, 1.5};
  int l_cut_extra = 12;  // L_cut = L + l_cut_extra
};

struct LinePlotConfig {
  Vec3 start{-3.0, 0.0, 0.0};
  Vec3 end{3.0, 0.0, 0.0};
  int points = 601;
  int state = 1;  // 1-based eigenpair
};

struct StudySection {
  std::string sweep = "K";
  std::vector<double> values;
  BasisParams reference;
  double reference_C_sigma = 0.0;
  std::vector<int> track{1};
  std::vector<int> pw_values;
};

// Everything a run needs, parsed from an INI-style file with [section] headers.
struct ProblemConfig {
  std::string source;  // file path or "<string>"
  ProblemSpec problem;
  std::string fourier_file;
  BasisParams basis;
  AssemblyOptions assembly;
  int nev = 8;
  bool use_symmetry = true;
  bool scf = false;
  ScfConfig scf_config;
  StudySection study;
  InverseConfig inverse;
  LinePlotConfig lineplot;

  // Semantic checks (sites, ranges); throws Validation-category errors.
  void validate() const;
  SystemOptions system_options() const;
  StudyConfig study_config() const;
};

// Throws Error(ConfigParse) with line or key diagnostics; unknown keys are rejected.
// Overrides are "section.key=value" or "key=value" when the key is unique.
ProblemConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});
ProblemConfig parse_config_string(const std::string& text, const std::vector<std::string>& overrides = {},
                                  const std::string& base_dir = ".");

}  // namespace apwdg
