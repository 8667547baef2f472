#include "apwdg/commands.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include "apwdg/artifacts.hpp"
#include "json.hpp"

namespace apwdg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

class Run {
 public:
  Run(std::string command, const ProblemConfig& config, const CommandOptions& opts)
      : command_(std::move(command)), config_(config), opts_(opts), t0_(std::chrono::steady_clock::now()) {
    config.validate();
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (!fs::is_directory(opts.out_dir))
      throw Error(ErrorCode::Io, "output directory '" + opts.out_dir + "' cannot be created");
    info_["command"] = command_;
    info_["config"] = config.source;
    info_["units"] = "atomic (bohr, hartree)";
    info_["cell_edge"] = config.problem.cell.edge();
    json sites = json::array();
    for (const auto& s : config.problem.sites)
      sites.push_back({{"center", {s.center.x, s.center.y, s.center.z}}, {"radius", s.radius}, {"charge", s.charge}});
    info_["sites"] = sites;
    info_["basis"] = {{"K", config.basis.K},
                      {"N", config.basis.N},
                      {"L", config.basis.L},
                      {"epsilon", config.basis.epsilon},
                      {"radial", config.basis.radial == RadialKind::Slater ? "slater" : "polynomial"}};
    info_["C_sigma"] = config.assembly.C_sigma;
    if (auto w = config.basis.balance_warning()) warn(*w);
  }

  std::string path(const std::string& name) const { return (fs::path(opts_.out_dir) / name).string(); }
  void wrote(const std::string& name) { report_.files.push_back(name); }
  void warn(const std::string& w) {
    for (const auto& x : report_.warnings)
      if (x == w) return;
    report_.warnings.push_back(w);
  }
  void say(const std::string& line) { report_.summary.push_back(line); }
  json& info() { return info_; }
  const ProblemConfig& config() const { return config_; }
  const CommandOptions& opts() const { return opts_; }

  CommandReport finish() {
    info_["warnings"] = report_.warnings;
    info_["wall_s"] = seconds_since(t0_);
    report_.files.push_back("run.json");
    info_["files"] = report_.files;
    write_text_file(path("run.json"), info_.dump(2) + "\n");
    return report_;
  }

 private:
  std::string command_;
  const ProblemConfig& config_;
  const CommandOptions& opts_;
  std::chrono::steady_clock::time_point t0_;
  json info_;
  CommandReport report_;
};

json eigen_json(const EigenSolution& s) {
  return {{"eigenvalues", s.eigenvalues},
          {"relative_residuals", s.relative_residuals},
          {"mass_condition", s.mass_condition}};
}

std::string fmt(double v, int digits = 10) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

struct Solved {
  std::shared_ptr<const MixedBasis> basis;
  std::unique_ptr<DgSystem> system;  // null for SCF runs
  EigenSolution solution;
  std::vector<std::string> labels;
};

Solved solve_linear(Run& run, int nev) {
  const auto& c = run.config();
  Solved out;
  out.basis = build_mixed_basis(c.problem.cell, c.problem.sites, c.basis);
  for (const auto& w : out.basis->warnings()) run.warn(w);
  if (nev > static_cast<int>(out.basis->total_dim()))
    throw Error(ErrorCode::InvalidArgument, "solver.nev = " + std::to_string(nev) + " exceeds the basis dimension " +
                                                std::to_string(out.basis->total_dim()));
  out.system = std::make_unique<DgSystem>(out.basis, c.problem.potential_for(c.basis.K), c.system_options());
  SolveTiming t;
  out.solution = out.system->solve(nev, &t);
  for (const auto& w : out.system->warnings()) run.warn(w);
  for (int i = 0; i < static_cast<int>(out.system->symmetry().n_irreps()); ++i) out.labels.push_back(out.system->symmetry().irrep_label(i));
  run.info()["dofs"] = out.basis->total_dim();
  run.info()["sigma"] = out.system->sigma();
  run.info()["symmetry_blocks"] = out.labels;
  run.info()["assemble_s"] = out.system->setup_seconds() + t.assemble_s;
  run.info()["solve_s"] = t.solve_s;
  run.info()["solution"] = eigen_json(out.solution);
  return out;
}

void record_scf(Run& run, const ScfState& st) {
  run.info()["scf"] = {{"converged", st.converged},
                       {"iterations", st.iterations},
                       {"max_charge_error", st.max_charge_error},
                       {"final_residual", st.history.empty() ? 0.0 : st.history.back().residual}};
}

}  // namespace

bool is_command(const std::string& c) {
  return c == "solve" || c == "converge" || c == "scf" || c == "inverse-estimate" || c == "line-plot";
}

CommandReport run_solve(const ProblemConfig& config, const CommandOptions& opts) {
  Run run("solve", config, opts);
  Solved s = solve_linear(run, config.nev);
  write_eigenvalues_csv(run.path("eigenvalues.csv"), s.solution, s.labels);
  run.wrote("eigenvalues.csv");
  if (opts.dump_matrices) {
    const AssembledOperators ops = s.system->full(true);
    write_matrix_csv(run.path("H.csv"), ops.H);
    write_matrix_csv(run.path("M.csv"), ops.M);
    write_matrix_csv(run.path("A_lap.csv"), ops.A_lap);
    write_matrix_csv(run.path("J.csv"), ops.J);
    for (const char* f : {"H.csv", "M.csv", "A_lap.csv", "J.csv"}) run.wrote(f);
  }
  run.say("dofs " + std::to_string(s.basis->total_dim()) + ", sigma " + fmt(s.system->sigma()));
  for (std::size_t i = 0; i < s.solution.size(); ++i)
    run.say("lambda_" + std::to_string(i + 1) + " = " + fmt(s.solution.eigenvalues[i], 12));
  return run.finish();
}

CommandReport run_converge(const ProblemConfig& config, const CommandOptions& opts) {
  Run run("converge", config, opts);
  if (config.study.values.empty() && config.study.pw_values.empty())
    throw Error(ErrorCode::InvalidArgument, "[study] needs values or pw_values for converge");
  const StudyConfig sc = config.study_config();
  const StudyResult r = convergence_study(sc);
  for (const auto& w : r.warnings) run.warn(w);
  write_study_csv(run.path("study.csv"), r.records);
  run.wrote("study.csv");
  run.info()["study"] = {{"sweep_var", sc.sweep_var},
                         {"values", sc.values},
                         {"pw_values", sc.pw_values},
                         {"reference", {{"K", sc.reference.K}, {"N", sc.reference.N}, {"L", sc.reference.L}}},
                         {"reference_dofs", r.reference_dofs},
                         {"reference_eigenvalues", r.reference_eigenvalues}};
  run.say("reference dofs " + std::to_string(r.reference_dofs));
  for (std::size_t i = 0; i < r.reference_eigenvalues.size(); ++i)
    run.say("reference lambda_" + std::to_string(i + 1) + " = " + fmt(r.reference_eigenvalues[i], 12));
  for (const auto& rec : r.records)
    run.say(rec.sweep_var + "=" + fmt(rec.value) + " dofs " + std::to_string(rec.dofs) + " eig " +
            std::to_string(rec.eig_index) + " error " + fmt(rec.eig_error, 4));
  return run.finish();
}

CommandReport run_scf(const ProblemConfig& config, const CommandOptions& opts) {
  Run run("scf", config, opts);
  if (config.problem.potential != PotentialKind::Coulomb)
    throw Error(ErrorCode::InvalidArgument, "scf requires potential.kind = coulomb");
  ScfState st;
  try {
    st = scf_solve(config.problem.cell, config.problem.sites, config.basis, config.scf_config, config.system_options());
  } catch (const ScfNotConverged& e) {
    write_scf_history_csv(run.path("scf_history.csv"), e.state().history);
    run.wrote("scf_history.csv");
    record_scf(run, e.state());
    run.warn(e.what());
    run.finish();
    throw;
  }
  write_scf_history_csv(run.path("scf_history.csv"), st.history);
  run.wrote("scf_history.csv");
  write_eigenvalues_csv(run.path("eigenvalues.csv"), st.solution, {});
  run.wrote("eigenvalues.csv");
  record_scf(run, st);
  run.info()["dofs"] = st.basis->total_dim();
  run.info()["solution"] = eigen_json(st.solution);
  run.say("converged in " + std::to_string(st.iterations) + " iterations");
  run.say("lambda_1 = " + fmt(st.solution.eigenvalues.front(), 12));
  run.say("max charge error " + fmt(st.max_charge_error, 3));
  return run.finish();
}

CommandReport run_inverse_estimate(const ProblemConfig& config, const CommandOptions& opts) {
  Run run("inverse-estimate", config, opts);
  std::vector<InverseEstimate> rows;
  for (const double R : config.inverse.radii) {
    for (const int v : config.inverse.varrho) {
      BasisParams p = config.basis;
      p.K = p.N = p.L = v;
      AtomicSite site;
      site.radius = R;
      site.charge = 0.0;
      require_valid_sites(config.problem.cell, {site});
      rows.push_back(surface_inverse_estimate(config.problem.cell, site, p, v + config.inverse.l_cut_extra));
    }
  }
  write_scaling_csv(run.path("scaling.csv"), rows);
  run.wrote("scaling.csv");
  const auto fits = fit_scaling(rows);
  write_scaling_fit_csv(run.path("scaling_fit.csv"), fits);
  run.wrote("scaling_fit.csv");
  json jf = json::array();
  for (const auto& f : fits) {
    jf.push_back({{"R", f.radius}, {"slope", f.fit.slope}, {"r2", f.fit.r2}});
    run.say("R = " + fmt(f.radius) + ": log-log slope " + fmt(f.fit.slope, 4) + " (r2 " + fmt(f.fit.r2, 4) + ")");
  }
  run.info()["fits"] = jf;
  return run.finish();
}

CommandReport run_line_plot(const ProblemConfig& config, const CommandOptions& opts) {
  Run run("line-plot", config, opts);
  const auto& lp = config.lineplot;
  const int nev = std::max(config.nev, lp.state);
  DgFunction fn;
  double lambda = 0.0;
  if (config.scf) {
    ScfConfig sc = config.scf_config;
    const ScfState st = scf_solve(config.problem.cell, config.problem.sites, config.basis, sc, config.system_options());
    record_scf(run, st);
    if (lp.state != 1) throw Error(ErrorCode::InvalidArgument, "line-plot of an SCF run supports only state = 1");
    fn.basis = st.basis;
    fn.coeffs = st.solution.vector(0);
    lambda = st.solution.eigenvalues[0];
  } else {
    Solved s = solve_linear(run, nev);
    fn.basis = s.basis;
    fn.coeffs = s.solution.vector(lp.state - 1);
    lambda = s.solution.eigenvalues[lp.state - 1];
  }
  const Vec3 d = lp.end - lp.start;
  const double len = d.norm();
  if (!(len > 0)) throw Error(ErrorCode::InvalidArgument, "lineplot.start and lineplot.end coincide");
  const Vec3 u = d * (1.0 / len);
  const double x0 = lp.start.dot(u);
  std::vector<LineSample> samples(lp.points);
  for (int i = 0; i < lp.points; ++i) {
    const double t = static_cast<double>(i) / (lp.points - 1);
    samples[i].point = lp.start + d * t;
    samples[i].x = x0 + t * len;
    samples[i].value = eval_dg_function(fn, samples[i].point);
  }
  write_line_csv(run.path("line.csv"), samples);
  run.wrote("line.csv");
  run.info()["lineplot"] = {{"state", lp.state},
                            {"eigenvalue", lambda},
                            {"start", {lp.start.x, lp.start.y, lp.start.z}},
                            {"end", {lp.end.x, lp.end.y, lp.end.z}},
                            {"points", lp.points}};
  run.say("state " + std::to_string(lp.state) + ", lambda = " + fmt(lambda, 12) + ", " + std::to_string(lp.points) +
          " samples");
  return run.finish();
}

CommandReport run_command(const std::string& command, const ProblemConfig& config, const CommandOptions& opts) {
  if (command == "solve") return run_solve(config, opts);
  if (command == "converge") return run_converge(config, opts);
  if (command == "scf") return run_scf(config, opts);
  if (command == "inverse-estimate") return run_inverse_estimate(config, opts);
  if (command == "line-plot") return run_line_plot(config, opts);
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace apwdg
