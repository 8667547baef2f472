#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apwdg/geometry.hpp"
#include "apwdg/specialfn.hpp"

namespace apwdg {

struct BasisParams {
  int K = 1;
  int N = 0;
  int L = 0;
  double epsilon = 0.0;
  RadialKind radial = RadialKind::Polynomial;
  double slater_eta = 1.0;

  int varrho() const;
  // Set when max(K,N,L) / min(K,N,L) > 4.
  std::optional<std::string> balance_warning() const;
};

struct SphereDof {
  int n, l, m;
};

class MixedBasis {
 public:
  MixedBasis(const UnitCell& cell, std::vector<AtomicSite> sites, const BasisParams& params);

  const UnitCell& cell() const { return cell_; }
  const std::vector<AtomicSite>& sites() const { return sites_; }
  const BasisParams& params() const { return params_; }
  const std::vector<Wavevector>& pw() const { return pw_; }
  // (n, l, m) in lexicographic (l, m, n) order; identical for every site.
  const std::vector<SphereDof>& sphere_dofs() const { return sphere_dofs_; }

  std::size_t n_pw() const { return pw_.size(); }
  std::size_t n_sites() const { return sites_.size(); }
  std::size_t sphere_block() const { return sphere_dofs_.size(); }
  std::size_t sphere_offset(int site) const { return pw_.size() + site * sphere_dofs_.size(); }
  std::size_t total_dim() const { return pw_.size() + sites_.size() * sphere_dofs_.size(); }

  std::size_t sphere_index(int site, int n, int l, int m) const {
    return sphere_offset(site) + static_cast<std::size_t>(lm_index(l, m)) * (params_.N + 1) + n;
  }
  // -1 when the wavevector is not in the basis.
  long pw_index(const IVec3& n) const;
  // Site index whose closed ball contains the point (after periodic wrapping), or -1.
  int region_of(const Vec3& point) const;

  RadialFamily radial_family(int site) const;
  std::vector<std::string> warnings() const;

 private:
  UnitCell cell_;
  std::vector<AtomicSite> sites_;
  BasisParams params_;
  std::vector<Wavevector> pw_;
  std::vector<SphereDof> sphere_dofs_;
  std::map<IVec3, long> pw_lookup_;
};

std::shared_ptr<const MixedBasis> build_mixed_basis(const UnitCell& cell, const std::vector<AtomicSite>& sites,
                                                    const BasisParams& params);

struct DgFunction {
  std::shared_ptr<const MixedBasis> basis;
  CVector coeffs;
};

// Inside a sphere only that sphere's expansion is used; on r = R the inside limit is returned.
cplx eval_dg_function(const DgFunction& fn, const Vec3& point);
// Outside trace minus inside trace on the surface of `site`.
cplx trace_jump(const DgFunction& fn, int site, double theta, double phi);
// Plane-wave part alone, evaluated anywhere.
cplx eval_pw_part(const MixedBasis& basis, const CVector& coeffs, const Vec3& point);
// Expansion of `site` at a local offset with |offset| <= R.
cplx eval_sphere_part(const MixedBasis& basis, const CVector& coeffs, int site, const Vec3& offset);

// Coefficients of the global constant 1 (polynomial radial family only).
CVector constant_function_coefficients(const MixedBasis& basis);

// True when every DOF of `coarse` is also a DOF of `fine` with the same basis function.
bool is_nested(const MixedBasis& coarse, const MixedBasis& fine);
// Index of each coarse DOF inside `fine`; throws InvalidArgument when not nested.
std::vector<std::size_t> embedding_map(const MixedBasis& coarse, const MixedBasis& fine);
CVector embed(const MixedBasis& coarse, const CVector& coeffs, const MixedBasis& fine);

}  // namespace apwdg
