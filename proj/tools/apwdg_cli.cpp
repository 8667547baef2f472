#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apwdg/apwdg.h"
#include "json.hpp"

namespace {

int report_error(apwdg_status status, const std::string& message) {
  const int code = apwdg_exit_code(status);
  nlohmann::json err = {{"error", {{"status", apwdg_status_name(status)}, {"exit_code", code}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
  return code;
}

int usage_error(const std::string& message) {
  nlohmann::json err = {{"error", {{"status", "Usage"}, {"exit_code", 2}, {"message", message}}}};
  std::cerr << err.dump() << std::endl;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-basis discontinuous Galerkin eigensolver for periodic Coulomb problems (atomic units)"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string config, out_dir = ".";
  std::vector<std::string> overrides;
  bool dump = false;
  int threads = 1;
  app.add_option("-c,--config", config, "Problem config file (INI sections)")->required();
  app.add_option("-o,--out", out_dir, "Output directory for CSV/JSON artifacts");
  app.add_option("--set", overrides, "Override a config value, section.key=value (repeatable)")
      ->allow_extra_args(false);
  app.add_flag("--dump-matrices", dump, "Also write H, M, A_lap and J as row,col,re,im CSV (solve only)");
  app.add_option("--threads", threads, "Worker threads for assembly and dense kernels")->check(CLI::PositiveNumber);

  app.add_subcommand("solve", "Lowest eigenpairs; writes eigenvalues.csv");
  app.add_subcommand("converge", "Convergence study against a high-resolution reference; writes study.csv");
  app.add_subcommand("scf", "Self-consistent Hartree iteration; writes scf_history.csv");
  app.add_subcommand("inverse-estimate", "Surface inverse-estimate scaling; writes scaling.csv");
  app.add_subcommand("line-plot", "Eigenfunction samples along a segment; writes line.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return usage_error(e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  apwdg_status st = apwdg_set_threads(threads);
  if (st != APWDG_OK) return report_error(st, apwdg_last_error());

  std::vector<const char*> ov;
  for (const auto& o : overrides) ov.push_back(o.c_str());
  apwdg_problem* problem = nullptr;
  st = apwdg_problem_from_file(config.c_str(), ov.data(), ov.size(), &problem);
  if (st != APWDG_OK) return report_error(st, apwdg_last_error());

  apwdg_report* report = nullptr;
  st = apwdg_run_command(problem, command.c_str(), out_dir.c_str(), dump ? 1 : 0, &report);
  apwdg_problem_free(problem);
  if (st != APWDG_OK) return report_error(st, apwdg_last_error());

  for (size_t i = 0; i < apwdg_report_count(report, 1); ++i)
    std::cerr << "warning: " << apwdg_report_item(report, 1, i) << "\n";
  for (size_t i = 0; i < apwdg_report_count(report, 2); ++i) std::cout << apwdg_report_item(report, 2, i) << "\n";
  for (size_t i = 0; i < apwdg_report_count(report, 0); ++i)
    std::cout << "wrote " << out_dir << "/" << apwdg_report_item(report, 0, i) << "\n";
  apwdg_report_free(report);
  return 0;
}
