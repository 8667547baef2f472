#include "apwdg/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <map>

namespace apwdg {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_eigenvalues_csv(const std::string& path, const EigenSolution& solution,
                           const std::vector<std::string>& block_labels) {
  auto out = open_output(path);
  out << "index,eigenvalue,residual_norm,relative_residual,symmetry_block\n";
  for (std::size_t i = 0; i < solution.size(); ++i) {
    const int irrep = i < solution.irreps.size() ? solution.irreps[i] : 0;
    const std::string label =
        irrep >= 0 && static_cast<std::size_t>(irrep) < block_labels.size() ? block_labels[irrep] : std::to_string(irrep);
    out << i + 1 << ',' << format_double(solution.eigenvalues[i]) << ','
        << format_double(i < solution.residual_norms.size() ? solution.residual_norms[i] : kNaN) << ','
        << format_double(i < solution.relative_residuals.size() ? solution.relative_residuals[i] : kNaN) << ','
        << label << '\n';
  }
  finish(out, path);
}

void write_study_csv(const std::string& path, const std::vector<ErrorRecord>& records) {
  auto out = open_output(path);
  out << "sweep_var,value,dofs,eig_index,eig_error,l2_error,dg_error,assemble_s,solve_s\n";
  for (const auto& r : records) {
    out << r.sweep_var << ',' << format_double(r.value) << ',' << r.dofs << ',' << r.eig_index << ','
        << format_double(r.eig_error) << ',' << format_double(r.l2_error) << ',' << format_double(r.dg_error) << ','
        << format_double(r.assemble_s) << ',' << format_double(r.solve_s) << '\n';
  }
  finish(out, path);
}

void write_scf_history_csv(const std::string& path, const std::vector<ScfIteration>& history) {
  auto out = open_output(path);
  out << "iteration,residual,lambda,charge\n";
  for (const auto& h : history) {
    out << h.iteration << ',' << format_double(h.residual) << ',' << format_double(h.eigenvalue) << ','
        << format_double(h.charge) << '\n';
  }
  finish(out, path);
}

void write_scaling_csv(const std::string& path, const std::vector<InverseEstimate>& rows) {
  auto out = open_output(path);
  out << "R,varrho,lambda_max,trace_rank,dropped_modes\n";
  for (const auto& r : rows) {
    out << format_double(r.radius) << ',' << r.varrho << ',' << format_double(r.lambda_max) << ',' << r.trace_rank
        << ',' << r.dropped_modes << '\n';
  }
  finish(out, path);
}

std::vector<ScalingFit> fit_scaling(const std::vector<InverseEstimate>& rows) {
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_radius;
  for (const auto& r : rows) {
    auto& [x, y] = by_radius[r.radius];
    x.push_back(std::log(static_cast<double>(r.varrho)));
    y.push_back(std::log(r.lambda_max));
  }
  std::vector<ScalingFit> fits;
  for (const auto& [R, xy] : by_radius) {
    if (xy.first.size() < 2) continue;
    fits.push_back({R, fit_line(xy.first, xy.second)});
  }
  return fits;
}

void write_scaling_fit_csv(const std::string& path, const std::vector<ScalingFit>& fits) {
  auto out = open_output(path);
  out << "R,slope,intercept,r2\n";
  for (const auto& f : fits) {
    out << format_double(f.radius) << ',' << format_double(f.fit.slope) << ',' << format_double(f.fit.intercept)
        << ',' << format_double(f.fit.r2) << '\n';
  }
  finish(out, path);
}

void write_line_csv(const std::string& path, const std::vector<LineSample>& samples) {
  auto out = open_output(path);
  out << "x,re,im\n";
  for (const auto& s : samples)
    out << format_double(s.x) << ',' << format_double(s.value.real()) << ',' << format_double(s.value.imag()) << '\n';
  finish(out, path);
}

void write_matrix_csv(const std::string& path, const CMatrix& a) {
  auto out = open_output(path);
  out << "row,col,re,im\n";
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const cplx v = a(i, j);
      if (v == cplx(0.0)) continue;
      out << i << ',' << j << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
  finish(out, path);
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  finish(out, path);
}

}  // namespace apwdg
