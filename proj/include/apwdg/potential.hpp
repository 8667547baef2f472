#pragma once

#include <memory>
#include <string>
#include <vector>

#include "apwdg/geometry.hpp"

namespace apwdg {

// Coefficients against normalized plane waves e_k on the ball |n| <= kmax.
class FourierGrid {
 public:
  FourierGrid() = default;
  explicit FourierGrid(int kmax);

  int kmax() const { return kmax_; }
  bool empty() const { return kmax_ < 0; }
  bool contains(const IVec3& n) const {
    return kmax_ >= 0 && n.norm2() <= kmax_ * kmax_;
  }
  cplx operator()(const IVec3& n) const { return contains(n) ? data_[offset(n)] : cplx(0.0); }
  cplx& at(const IVec3& n);

  // Every index on the ball, in storage order.
  template <class F>
  void for_each(F&& f) const {
    for (int a = -kmax_; a <= kmax_; ++a)
      for (int b = -kmax_; b <= kmax_; ++b)
        for (int c = -kmax_; c <= kmax_; ++c) {
          const IVec3 n{a, b, c};
          if (n.norm2() <= kmax_ * kmax_) f(n, data_[offset(n)]);
        }
  }

  double l2_norm() const;
  // Max |F(-n) - conj F(n)|.
  double reality_defect() const;
  FourierGrid& axpy(double a, const FourierGrid& x);  // this += a x, grows to fit
  FourierGrid& scale(double a);

 private:
  std::size_t offset(const IVec3& n) const {
    return (static_cast<std::size_t>(n.n1 + kmax_) * side_ + (n.n2 + kmax_)) * side_ + (n.n3 + kmax_);
  }
  int kmax_ = -1;
  int side_ = 0;
  std::vector<cplx> data_;
};

// Periodic potential of a unit point charge with neutralizing background:
// phi(d) = (4 pi / |Omega|) sum_{k != 0} e^{i k.d} / |k|^2, by Ewald splitting.
class EwaldKernel {
 public:
  explicit EwaldKernel(double edge, double alpha = 0.0);
  double alpha() const { return alpha_; }
  double phi(const Vec3& d) const;
  // phi(d) - 1/|d*| with d* the minimum image of d; finite at d = 0.
  double phi_regular(const Vec3& d) const;

 private:
  double real_space(const Vec3& dmin, bool drop_center_singularity) const;
  double reciprocal(const Vec3& d) const;

  double edge_, alpha_, volume_;
  int nmax_ = 0;
  int images_ = 1;
  struct Mode {
    int n1, n2, n3;
    double weight;
  };
  std::vector<Mode> modes_;  // half space, weights doubled
};

struct PotentialSpec {
  UnitCell cell{1.0};
  std::vector<AtomicSite> sites;
  // Charge of the periodized Coulomb nucleus at each site center (0 for none).
  std::vector<double> coulomb_charge;
  // Additional smooth Fourier coefficients (user file or Hartree).
  FourierGrid extra;
  int k_cutoff = 1;
  std::shared_ptr<const EwaldKernel> ewald;

  bool has_coulomb() const;
  // Coefficient against e_k, zero for |n| > k_cutoff.
  cplx fourier(const IVec3& n) const;
  // Coulomb part only, without cutoff.
  cplx coulomb_fourier(const IVec3& n) const;
};

PotentialSpec zero_potential(const UnitCell& cell, const std::vector<AtomicSite>& sites, int k_cutoff);
PotentialSpec periodized_coulomb_fourier(const UnitCell& cell, const std::vector<AtomicSite>& sites, int k_cutoff);
PotentialSpec fourier_potential(const UnitCell& cell, const std::vector<AtomicSite>& sites, FourierGrid coeffs,
                                int k_cutoff);

// CSV rows n1,n2,n3,re,im (optional header). Rejects non-Hermitian input.
FourierGrid read_fourier_csv(const std::string& path);

// Pointwise V(r): Ewald for the Coulomb part plus the truncated extra Fourier sum.
double evaluate_potential_point(const PotentialSpec& spec, const Vec3& r);
// V(r) + Z_j / |r - R_j| near site j.
double smooth_remainder(const PotentialSpec& spec, int site, const Vec3& r);
// Truncated sum of spec.extra at r.
double evaluate_extra_point(const PotentialSpec& spec, const Vec3& r);

struct SphereExpansion {
  int site = 0;
  Vec3 center;
  double radius = 1.0;
  double singular_charge = 0.0;
  int l_pot = 0;
  std::vector<double> nodes;
  std::vector<cplx> w;  // w[lm * nodes.size() + i]

  cplx smooth(int lm, std::size_t i) const { return w[static_cast<std::size_t>(lm) * nodes.size() + i]; }
  // -Z/r + sum_lm w_lm(r_i) Y_lm(dir) at node i.
  double reconstruct(std::size_t node, const Vec3& direction) const;
  // Angular L2 norm of the degree-l part, summed over nodes.
  double degree_norm(int l) const;
};

// Coulomb remainder by angular quadrature of the Ewald sum; extra Fourier
// coefficients projected analytically through the plane-wave expansion.
SphereExpansion sphere_expansion(const PotentialSpec& spec, int site, int l_pot,
                                 const std::vector<double>& radial_nodes);

// Only the Coulomb (Ewald) remainder; the extra part is added by add_extra_expansion.
SphereExpansion coulomb_sphere_expansion(const PotentialSpec& spec, int site, int l_pot,
                                         const std::vector<double>& radial_nodes);
void add_extra_expansion(const PotentialSpec& spec, const FourierGrid& extra, SphereExpansion& exp);

FourierGrid hartree_fourier(const UnitCell& cell, const FourierGrid& density);

}  // namespace apwdg
