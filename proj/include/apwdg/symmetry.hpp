#pragma once

#include <array>
#include <string>
#include <vector>

#include "apwdg/assembly.hpp"

namespace apwdg {

// Coordinate reflection r -> (s[0] x, s[1] y, s[2] z), s[i] = +-1.
struct Reflection {
  std::array<int, 3> s{1, 1, 1};
  bool operator==(const Reflection&) const = default;
};

// Image of one basis function under (T f)(r) = f(s r): T phi_i = factor * phi_index.
struct DofImage {
  std::size_t index;
  cplx factor;
};

// Block diagonalization of the discrete operators by the coordinate reflections that map
// the sites (with radii and charges) and the potential onto themselves. The symmetry
// adapted vectors are orthonormal in coefficient space, so blocks are u_a^H X u_b.
class SymmetryReduction {
 public:
  // With enabled = false only the identity is used and there is a single block.
  SymmetryReduction(const MixedBasis& basis, const PotentialSpec& potential, bool enabled = true);

  const std::vector<Reflection>& group() const { return group_; }
  std::size_t n_irreps() const { return irreps_.size(); }
  std::size_t block_dim(int irrep) const { return columns_.at(irrep).size(); }
  // Axis parities (0 even, 1 odd) of a representative character, as "xyz" digits.
  std::string irrep_label(int irrep) const;
  bool trivial() const { return group_.size() == 1; }

  DofImage image(const Reflection& r, std::size_t dof) const;
  CVector apply(const Reflection& r, const CVector& x) const;

  void fill_block(const OperatorTables& tables, int irrep, CMatrix* H, CMatrix* M, CMatrix* A, CMatrix* J) const;
  CVector expand(int irrep, const CVector& block) const;
  CVector restrict_to(int irrep, const CVector& full) const;

 private:
  struct Column {
    std::size_t rep;      // basis index whose projection defines the column
    double rep_weight;    // |u[rep]|
    std::vector<std::pair<std::size_t, cplx>> terms;
  };

  const MixedBasis& basis_;
  std::vector<Reflection> group_;
  std::vector<std::array<int, 3>> irreps_;   // representative parity triples
  std::vector<std::vector<int>> characters_;  // [irrep][group element]
  std::vector<std::vector<Column>> columns_;
  std::vector<std::vector<int>> site_image_;  // [group element][site]
};

// All eight reflections that are symmetries of the configuration.
std::vector<Reflection> detect_reflections(const MixedBasis& basis, const PotentialSpec& potential);

}  // namespace apwdg
