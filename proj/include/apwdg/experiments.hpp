#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "apwdg/scf.hpp"
#include "apwdg/system.hpp"

namespace apwdg {

enum class PotentialKind { Coulomb, Zero, Fourier };

// Physical problem independent of the discretization.
struct ProblemSpec {
  UnitCell cell{10.0};
  std::vector<AtomicSite> sites;
  PotentialKind potential = PotentialKind::Coulomb;
  FourierGrid extra;  // Fourier-file coefficients (Fourier kind only)
  int k_pot = 0;      // 0 selects 4K

  int effective_k_pot(int K) const { return k_pot > 0 ? k_pot : 4 * K; }
  // Potential for a basis with cutoff K; `sites` overrides the site list (radius sweeps).
  PotentialSpec potential_for(int K, const std::vector<AtomicSite>* sites = nullptr) const;
};

// Plane waves over the whole cell: kinetic diagonal plus V(k_q - k_p); no spheres.
EigenSolution pw_reference_solve(const UnitCell& cell, const PotentialSpec& potential, int K_ref, int nev,
                                 bool use_symmetry = true);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ErrorRecord {
  std::string sweep_var;
  double value = 0.0;
  std::size_t dofs = 0;
  int eig_index = 1;  // 1-based index of the reference pair
  double eigenvalue = 0.0;
  double eig_error = 0.0;
  double l2_error = kNaN;
  double dg_error = kNaN;
  double assemble_s = 0.0;
  double solve_s = 0.0;
};

// Mass, Laplace and jump blocks of a reference system, built once per symmetry block.
class ReferenceOperators {
 public:
  explicit ReferenceOperators(const DgSystem& system) : system_(system) {}
  const DgSystem& system() const { return system_; }
  const AssembledOperators& block(int irrep);

 private:
  const DgSystem& system_;
  std::map<int, AssembledOperators> blocks_;
};

// Errors of the pairs of `solution` against the tracked reference pairs (1-based).
// Pairs are matched by maximal M-overlap |<u, u_ref>| inside the reference block; no
// reference pair receives two trial pairs. Function errors use the reference operators
// after embedding (NaN when the trial basis is not nested in the reference basis):
// L2^2 = e^H M e and DG^2 = e^H (2 A + M + sigma_ref J) e after phase alignment.
std::vector<ErrorRecord> dg_error(const MixedBasis& basis, const EigenSolution& solution,
                                  ReferenceOperators& reference, const EigenSolution& reference_solution,
                                  const std::vector<int>& track, std::vector<std::string>* warnings = nullptr);

struct StudyConfig {
  ProblemSpec problem;
  BasisParams base;
  double C_sigma = 20.0;
  AssemblyOptions assembly;
  bool use_symmetry = true;
  std::string sweep_var = "K";  // K, N, L, R or C_sigma
  std::vector<double> values;
  BasisParams reference;
  double reference_C_sigma = 0.0;  // 0 uses C_sigma
  std::vector<int> track{1};
  bool scf = false;
  ScfConfig scf_config;
  std::vector<int> pw_values;  // plane-wave baseline cutoffs, sweep_var "K_pw"

  void validate() const;
  BasisParams params_at(double value) const;
  std::vector<AtomicSite> sites_at(double value) const;
  double c_sigma_at(double value) const;
};

struct StudyResult {
  std::vector<ErrorRecord> records;
  std::vector<double> reference_eigenvalues;
  std::size_t reference_dofs = 0;
  std::vector<std::string> warnings;
};

StudyResult convergence_study(const StudyConfig& config);

struct InverseEstimate {
  int varrho = 0;
  double radius = 0.0;
  double lambda_max = 0.0;
  int trace_rank = 0;
  int dropped_modes = 0;
};

// Largest eigenvalue of (-Delta_S2 + 1) on the span of the surface traces of all basis
// functions of one sphere, in spherical harmonics up to l_cut.
InverseEstimate surface_inverse_estimate(const UnitCell& cell, const AtomicSite& site, const BasisParams& params,
                                         int l_cut);

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace apwdg
