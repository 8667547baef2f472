#pragma once

#include <vector>

#include "apwdg/assembly.hpp"
#include "apwdg/matrix.hpp"

namespace apwdg {

struct EigenSolution {
  std::vector<double> eigenvalues;     // ascending
  CMatrix eigenvectors;                // columns M-orthonormal
  std::vector<double> residual_norms;  // ||H x - lambda M x||_2
  std::vector<double> relative_residuals;  // residual / ||H x||_2
  std::vector<int> irreps;             // symmetry block of each pair, 0 when unreduced
  double mass_condition = 0.0;         // 1-norm condition estimate of M (worst block)

  std::size_t size() const { return eigenvalues.size(); }
  CVector vector(std::size_t i) const;
};

inline constexpr double kMassConditionLimit = 1e12;

// Lowest nev pairs of H x = lambda M x by Cholesky reduction and a dense Hermitian solve.
EigenSolution solve_generalized(const CMatrix& H, const CMatrix& M, int nev,
                                double cond_limit = kMassConditionLimit);

EigenSolution solve_lowest(const AssembledOperators& ops, int nev);

// True when every eigenvalue of H x = lambda M x exceeds `shift` (Cholesky of H - shift M succeeds).
bool eigenvalues_above(const CMatrix& H, const CMatrix& M, double shift);

// Re(v^H H v) / (v^H M v).
double rayleigh_quotient(const AssembledOperators& ops, const CVector& v);
double rayleigh_quotient(const CMatrix& H, const CMatrix& M, const CVector& v);

// Rotates each column so that its largest component is real and positive.
void normalize_phases(CMatrix& vectors);

}  // namespace apwdg
