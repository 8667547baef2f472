#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apwdg/assembly.hpp"
#include "apwdg/solver.hpp"
#include "apwdg/symmetry.hpp"

namespace apwdg {

struct SystemOptions {
  AssemblyOptions assembly;
  bool use_symmetry = true;
};

struct SolveTiming {
  double assemble_s = 0.0;
  double solve_s = 0.0;
};

// A discretized problem: basis, potential, operator tables and its symmetry blocks.
// Blocks are assembled on demand so that only one block is held in memory at a time.
class DgSystem {
 public:
  DgSystem(std::shared_ptr<const MixedBasis> basis, PotentialSpec potential, const SystemOptions& opts,
           std::vector<SphereExpansion> expansions = {});

  const MixedBasis& basis() const { return *basis_; }
  const std::shared_ptr<const MixedBasis>& basis_ptr() const { return basis_; }
  const PotentialSpec& potential() const { return potential_; }
  const std::vector<SphereExpansion>& expansions() const { return expansions_; }
  const OperatorTables& tables() const { return *tables_; }
  const SymmetryReduction& symmetry() const { return *symmetry_; }
  double sigma() const { return tables_->sigma(); }
  std::vector<std::string> warnings() const { return tables_->warnings(); }
  double setup_seconds() const { return setup_s_; }

  AssembledOperators block(int irrep, bool auxiliary = true) const;
  // Unreduced operators in the original basis ordering.
  AssembledOperators full(bool auxiliary = true) const;

  // Lowest nev pairs over all blocks; eigenvectors are returned in the original basis.
  // Blocks are visited starting with `first_irrep`; once nev candidates are known, a block
  // is only diagonalized if a shifted Cholesky shows it has eigenvalues below the candidates.
  EigenSolution solve(int nev, SolveTiming* timing = nullptr, int first_irrep = 0) const;

 private:
  std::shared_ptr<const MixedBasis> basis_;
  PotentialSpec potential_;
  std::vector<SphereExpansion> expansions_;
  std::unique_ptr<OperatorTables> tables_;
  std::unique_ptr<SymmetryReduction> symmetry_;
  double setup_s_ = 0.0;
};

}  // namespace apwdg
