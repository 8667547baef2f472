#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apwdg/system.hpp"

namespace apwdg {

struct ScfConfig {
  double occupation = 2.0;  // electrons in the lowest orbital
  double mixing_alpha = 0.3;
  int max_iters = 50;
  double tol = 1e-8;
  int density_grid = 0;  // FFT size per dimension; 0 selects the smallest alias-free size
  double hartree_scale = 1.0;
  int k_pot = 0;  // Fourier cutoff of density and Hartree potential; 0 selects 4K

  void validate() const;
};

struct ScfIteration {
  int iteration = 0;
  double residual = 0.0;  // ||rho_out - rho_in||_2 over Fourier coefficients
  double eigenvalue = 0.0;
  double charge = 0.0;    // integral of rho_out
  double assemble_s = 0.0, solve_s = 0.0;
};

struct ScfState {
  std::shared_ptr<const MixedBasis> basis;
  int iterations = 0;
  bool converged = false;
  FourierGrid density;  // rho_in of the last iteration
  EigenSolution solution;
  std::vector<ScfIteration> history;
  double max_charge_error = 0.0;
};

// NotConverged error carrying the full iteration history.
class ScfNotConverged : public Error {
 public:
  ScfNotConverged(const std::string& message, ScfState state)
      : Error(ErrorCode::NotConverged, message), state_(std::make_shared<ScfState>(std::move(state))) {}
  const ScfState& state() const { return *state_; }

 private:
  std::shared_ptr<ScfState> state_;
};

// Fourier coefficients of rho = sum_i occ_i |u_i|^2 against e_g for |g| <= k_pot.
// The transform is exact for the piecewise representation: plane-wave products are
// convolved with the ball indicator and the sphere parts are integrated by Gaunt
// coefficients and radial quadrature. grid_n is a lower bound on the FFT size.
FourierGrid density_fourier(const MixedBasis& basis, const EigenSolution& solution,
                            const std::vector<double>& occupations, int grid_n, int k_pot);

int default_density_grid(const BasisParams& params, int k_pot);

// External potential: periodized Coulomb nuclei with the site charges.
ScfState scf_solve(const UnitCell& cell, const std::vector<AtomicSite>& sites, const BasisParams& params,
                   const ScfConfig& config, const SystemOptions& options = {});

}  // namespace apwdg
