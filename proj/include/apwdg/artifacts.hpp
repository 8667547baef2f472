#pragma once

#include <string>
#include <vector>

#include "apwdg/experiments.hpp"
#include "apwdg/matrix.hpp"

namespace apwdg {

// CSV writers: comma separator, '.' decimal point, one header row, values in atomic units.
// Doubles are printed with 17 significant digits so that reruns are byte-identical.

std::string format_double(double v);

// index, eigenvalue, residual_norm, relative_residual, symmetry_block
void write_eigenvalues_csv(const std::string& path, const EigenSolution& solution,
                           const std::vector<std::string>& block_labels);

// sweep_var, value, dofs, eig_index, eig_error, l2_error, dg_error, assemble_s, solve_s
void write_study_csv(const std::string& path, const std::vector<ErrorRecord>& records);

// iteration, residual, lambda, charge
void write_scf_history_csv(const std::string& path, const std::vector<ScfIteration>& history);

// R, varrho, lambda_max, trace_rank, dropped_modes
void write_scaling_csv(const std::string& path, const std::vector<InverseEstimate>& rows);

struct ScalingFit {
  double radius = 0.0;
  LineFit fit;  // log(lambda_max) against log(varrho)
};
std::vector<ScalingFit> fit_scaling(const std::vector<InverseEstimate>& rows);
// R, slope, intercept, r2
void write_scaling_fit_csv(const std::string& path, const std::vector<ScalingFit>& fits);

struct LineSample {
  double x = 0.0;  // signed coordinate along the segment direction
  Vec3 point;
  cplx value;
};
// x, re, im
void write_line_csv(const std::string& path, const std::vector<LineSample>& samples);

// row, col, re, im for every nonzero entry (0-based indices).
void write_matrix_csv(const std::string& path, const CMatrix& a);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace apwdg
