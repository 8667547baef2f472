#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apwdg/basis.hpp"
#include "apwdg/matrix.hpp"
#include "apwdg/potential.hpp"

namespace apwdg {

struct PenaltySpec {
  double C_sigma = 20.0;
  double epsilon = 0.0;
  double sigma = 0.0;
};

// sigma = C_sigma * varrho^(2 + 2 epsilon)
double penalty_sigma(const BasisParams& params, double C_sigma);
PenaltySpec make_penalty(const BasisParams& params, double C_sigma);

enum class SurfaceSum { ClosedForm, PartialWave };

struct AssemblyOptions {
  double C_sigma = 20.0;
  int l_pot = -1;          // angular cutoff of the sphere potential expansion; -1 selects 2L
  int radial_points = -1;  // Gauss-Legendre points on [0, R]; -1 selects an automatic order
  SurfaceSum surface = SurfaceSum::ClosedForm;
  int l_cut = -1;          // partial-wave surface sums; -1 selects L + 12
  bool auxiliary = true;   // also build A_lap and J
};

struct AssembledOperators {
  CMatrix H, M, A_lap, J;
  double sigma = 0.0;
  std::vector<std::string> warnings;
  std::size_t dim() const { return H.rows(); }
};

int default_l_pot(const BasisParams& params, const AssemblyOptions& opts);
QuadratureRule radial_rule(const MixedBasis& basis, int site, const AssemblyOptions& opts);

// Sphere expansions of `potential` on the radial rule used by assembly.
std::vector<SphereExpansion> build_sphere_expansions(const MixedBasis& basis, const PotentialSpec& potential,
                                                     const AssemblyOptions& opts);

// Precomputed tables from which any matrix entry is formed in O(1) (plane-wave rows)
// or O(L_pot) (sphere rows) work.
class OperatorTables {
 public:
  OperatorTables(const MixedBasis& basis, const PotentialSpec& potential,
                 const std::vector<SphereExpansion>& expansions, const AssemblyOptions& opts);
  ~OperatorTables();
  OperatorTables(const OperatorTables&) = delete;
  OperatorTables& operator=(const OperatorTables&) = delete;

  struct Entry {
    cplx H, M, A, J;
  };
  // Row p (test function, conjugated), column q (trial function).
  Entry entry(std::size_t p, std::size_t q) const;

  double sigma() const;
  const MixedBasis& basis() const;
  const std::vector<std::string>& warnings() const;

  // Fills the full matrices; any of the outputs may be null.
  void fill(CMatrix* H, CMatrix* M, CMatrix* A, CMatrix* J) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

AssembledOperators assemble(const MixedBasis& basis, const PotentialSpec& potential, const AssemblyOptions& opts);
AssembledOperators assemble(const MixedBasis& basis, const PotentialSpec& potential,
                            const std::vector<SphereExpansion>& expansions, const AssemblyOptions& opts);

CMatrix assemble_overlap(const MixedBasis& basis);
CMatrix assemble_hamiltonian(const MixedBasis& basis, const PotentialSpec& potential,
                             const std::vector<SphereExpansion>& expansions, const PenaltySpec& penalty,
                             AssemblyOptions opts = {});
struct LaplaceJump {
  CMatrix A_lap, J;
};
LaplaceJump assemble_laplace_mass_jump(const MixedBasis& basis, const PenaltySpec& penalty);

}  // namespace apwdg
