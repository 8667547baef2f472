#include "apwdg/apwdg.h"

#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "apwdg/commands.hpp"
#include "apwdg/parallel.hpp"

struct apwdg_problem {
  apwdg::ProblemConfig config;
};

struct apwdg_solution {
  std::shared_ptr<const apwdg::MixedBasis> basis;
  apwdg::EigenSolution solution;
};

struct apwdg_report {
  apwdg::CommandReport report;
};

namespace {

thread_local std::string g_last_error;

static_assert(static_cast<int>(apwdg::ErrorCode::ConfigParse) + 1 == APWDG_CONFIG_PARSE);
static_assert(static_cast<int>(apwdg::ErrorCode::Io) + 1 == APWDG_IO);

apwdg_status to_status(apwdg::ErrorCode code) {
  using apwdg::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigParse: return APWDG_CONFIG_PARSE;
    case ErrorCode::OverlappingSpheres: return APWDG_OVERLAPPING_SPHERES;
    case ErrorCode::SphereOutsideCell: return APWDG_SPHERE_OUTSIDE_CELL;
    case ErrorCode::InvalidIndex: return APWDG_INVALID_INDEX;
    case ErrorCode::OutOfRange: return APWDG_OUT_OF_RANGE;
    case ErrorCode::InvalidArgument: return APWDG_INVALID_ARGUMENT;
    case ErrorCode::GridTooCoarse: return APWDG_GRID_TOO_COARSE;
    case ErrorCode::AtSingularity: return APWDG_AT_SINGULARITY;
    case ErrorCode::QuadratureUnderResolved: return APWDG_QUADRATURE_UNDER_RESOLVED;
    case ErrorCode::MassNotPositiveDefinite: return APWDG_MASS_NOT_POSITIVE_DEFINITE;
    case ErrorCode::ConvergenceFailure: return APWDG_CONVERGENCE_FAILURE;
    case ErrorCode::NotConverged: return APWDG_NOT_CONVERGED;
    case ErrorCode::ZeroVector: return APWDG_ZERO_VECTOR;
    case ErrorCode::IndexMismatch: return APWDG_INDEX_MISMATCH;
    case ErrorCode::SymmetryMismatch: return APWDG_SYMMETRY_MISMATCH;
    case ErrorCode::Io: return APWDG_IO;
  }
  return APWDG_INTERNAL;
}

apwdg_status fail(apwdg_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
apwdg_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return APWDG_OK;
  } catch (const apwdg::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(APWDG_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(APWDG_INTERNAL, e.what());
  }
}

std::vector<std::string> collect(const char* const* overrides, size_t n) {
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i)
    if (overrides[i]) out.emplace_back(overrides[i]);
  return out;
}

const std::vector<std::string>* report_list(const apwdg_report* r, int kind) {
  if (!r) return nullptr;
  switch (kind) {
    case 0: return &r->report.files;
    case 1: return &r->report.warnings;
    case 2: return &r->report.summary;
    default: return nullptr;
  }
}

}  // namespace

extern "C" {

const char* apwdg_version(void) { return "1.0.0"; }

const char* apwdg_last_error(void) { return g_last_error.c_str(); }

const char* apwdg_status_name(apwdg_status status) {
  switch (status) {
    case APWDG_OK: return "Ok";
    case APWDG_NULL_ARGUMENT: return "NullArgument";
    case APWDG_INTERNAL: return "Internal";
    default:
      if (status < APWDG_CONFIG_PARSE || status > APWDG_IO) return "Unknown";
      return apwdg::error_code_name(static_cast<apwdg::ErrorCode>(static_cast<int>(status) - 1));
  }
}

int apwdg_exit_code(apwdg_status status) {
  if (status == APWDG_OK) return 0;
  if (status < APWDG_CONFIG_PARSE || status > APWDG_IO) return 1;
  switch (apwdg::error_category(static_cast<apwdg::ErrorCode>(static_cast<int>(status) - 1))) {
    case apwdg::ErrorCategory::ConfigParse: return 2;
    case apwdg::ErrorCategory::Validation: return 3;
    case apwdg::ErrorCategory::Numerical: return 4;
    case apwdg::ErrorCategory::Io: return 1;
  }
  return 1;
}

apwdg_status apwdg_set_threads(int n) {
  if (n < 1) return fail(APWDG_INVALID_ARGUMENT, "thread count must be >= 1");
  apwdg::set_num_threads(n);
  return APWDG_OK;
}

apwdg_status apwdg_problem_from_file(const char* path, const char* const* overrides, size_t n_overrides,
                                     apwdg_problem** out) {
  if (!path || !out || (n_overrides && !overrides)) return fail(APWDG_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<apwdg_problem>();
    p->config = apwdg::parse_config(path, collect(overrides, n_overrides));
    p->config.validate();
    *out = p.release();
  });
}

apwdg_status apwdg_problem_from_string(const char* text, const char* const* overrides, size_t n_overrides,
                                       apwdg_problem** out) {
  if (!text || !out || (n_overrides && !overrides)) return fail(APWDG_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto p = std::make_unique<apwdg_problem>();
    p->config = apwdg::parse_config_string(text, collect(overrides, n_overrides),
                                           std::filesystem::current_path().string());
    p->config.validate();
    *out = p.release();
  });
}

void apwdg_problem_free(apwdg_problem* problem) { delete problem; }

apwdg_status apwdg_problem_dim(const apwdg_problem* problem, size_t* dim) {
  if (!problem || !dim) return fail(APWDG_NULL_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& c = problem->config;
    c.validate();
    *dim = apwdg::MixedBasis(c.problem.cell, c.problem.sites, c.basis).total_dim();
  });
}

apwdg_status apwdg_solve(const apwdg_problem* problem, int nev, apwdg_solution** out) {
  if (!problem || !out) return fail(APWDG_NULL_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto& c = problem->config;
    c.validate();
    auto s = std::make_unique<apwdg_solution>();
    s->basis = apwdg::build_mixed_basis(c.problem.cell, c.problem.sites, c.basis);
    const int n = nev > 0 ? nev : c.nev;
    if (n > static_cast<int>(s->basis->total_dim()))
      throw apwdg::Error(apwdg::ErrorCode::InvalidArgument, "nev exceeds the basis dimension");
    apwdg::DgSystem system(s->basis, c.problem.potential_for(c.basis.K), c.system_options());
    s->solution = system.solve(n);
    *out = s.release();
  });
}

void apwdg_solution_free(apwdg_solution* solution) { delete solution; }

size_t apwdg_solution_count(const apwdg_solution* solution) { return solution ? solution->solution.size() : 0; }

size_t apwdg_solution_dim(const apwdg_solution* solution) { return solution ? solution->basis->total_dim() : 0; }

apwdg_status apwdg_solution_eigenvalue(const apwdg_solution* solution, size_t i, double* value) {
  if (!solution || !value) return fail(APWDG_NULL_ARGUMENT, "null argument");
  if (i >= solution->solution.size()) return fail(APWDG_INVALID_INDEX, "eigenpair index out of range");
  *value = solution->solution.eigenvalues[i];
  return APWDG_OK;
}

apwdg_status apwdg_solution_residual(const apwdg_solution* solution, size_t i, double* relative) {
  if (!solution || !relative) return fail(APWDG_NULL_ARGUMENT, "null argument");
  if (i >= solution->solution.size()) return fail(APWDG_INVALID_INDEX, "eigenpair index out of range");
  *relative = solution->solution.relative_residuals[i];
  return APWDG_OK;
}

apwdg_status apwdg_solution_vector(const apwdg_solution* solution, size_t i, double* buffer, size_t buffer_len) {
  if (!solution || !buffer) return fail(APWDG_NULL_ARGUMENT, "null argument");
  if (i >= solution->solution.size()) return fail(APWDG_INVALID_INDEX, "eigenpair index out of range");
  const size_t n = solution->basis->total_dim();
  if (buffer_len < 2 * n) return fail(APWDG_OUT_OF_RANGE, "buffer shorter than 2 * dim");
  const auto* col = solution->solution.eigenvectors.col(i);
  for (size_t k = 0; k < n; ++k) {
    buffer[2 * k] = col[k].real();
    buffer[2 * k + 1] = col[k].imag();
  }
  return APWDG_OK;
}

apwdg_status apwdg_solution_eval(const apwdg_solution* solution, size_t i, const double point[3], double* re,
                                 double* im) {
  if (!solution || !point || !re || !im) return fail(APWDG_NULL_ARGUMENT, "null argument");
  if (i >= solution->solution.size()) return fail(APWDG_INVALID_INDEX, "eigenpair index out of range");
  return guarded([&] {
    const apwdg::DgFunction fn{solution->basis, solution->solution.vector(i)};
    const apwdg::cplx v = apwdg::eval_dg_function(fn, {point[0], point[1], point[2]});
    *re = v.real();
    *im = v.imag();
  });
}

apwdg_status apwdg_run_command(const apwdg_problem* problem, const char* command, const char* out_dir,
                               int dump_matrices, apwdg_report** report) {
  if (!problem || !command || !out_dir) return fail(APWDG_NULL_ARGUMENT, "null argument");
  if (report) *report = nullptr;
  return guarded([&] {
    apwdg::CommandOptions opts;
    opts.out_dir = out_dir;
    opts.dump_matrices = dump_matrices != 0;
    auto r = std::make_unique<apwdg_report>();
    r->report = apwdg::run_command(command, problem->config, opts);
    if (report) *report = r.release();
  });
}

void apwdg_report_free(apwdg_report* report) { delete report; }

size_t apwdg_report_count(const apwdg_report* report, int kind) {
  const auto* l = report_list(report, kind);
  return l ? l->size() : 0;
}

const char* apwdg_report_item(const apwdg_report* report, int kind, size_t i) {
  const auto* l = report_list(report, kind);
  return l && i < l->size() ? (*l)[i].c_str() : nullptr;
}

}  // extern "C"
