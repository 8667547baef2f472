#pragma once

#include <utility>
#include <vector>

#include "apwdg/common.hpp"

namespace apwdg {

// Orthonormal complex spherical harmonic with the Condon-Shortley phase.
cplx sph_harm(int l, int m, double theta, double phi);

// All Y_lm for l <= lmax at direction (cos_theta, phi), indexed by lm_index(l, m).
void sph_harm_all(int lmax, double cos_theta, double phi, cplx* out);
// Same for the direction of v; v = 0 is treated as the +z axis.
void sph_harm_all(int lmax, const Vec3& v, cplx* out);
std::vector<cplx> sph_harm_all(int lmax, const Vec3& v);

// j_l(x) and dj_l/dx.
std::pair<double, double> sph_bessel(int l, double x);
// j_0..j_lmax and derivatives at x >= 0. dj may be null.
void sph_bessel_all(int lmax, double x, double* j, double* dj);

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3);
// Integral over S^2 of conj(Y_{l,m}) Y_{l2,m2} Y_{l3,m3}.
double gaunt(int l, int m, int l2, int m2, int l3, int m3);

// Precomputed gaunt(l, m, l2, m2, l3, m - m2) for l, l2 <= lmax and l3 <= lmax3.
class GauntTable {
 public:
  GauntTable(int lmax, int lmax3);
  int lmax() const { return lmax_; }
  int lmax3() const { return lmax3_; }
  // m3 is implied as m - m2.
  double operator()(int lm, int lm2, int l3) const {
    return data_[(static_cast<std::size_t>(lm) * nlm_ + lm2) * (lmax3_ + 1) + l3];
  }

 private:
  int lmax_, lmax3_, nlm_;
  std::vector<double> data_;
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b]; exact to degree 2n - 1.
QuadratureRule gauss_legendre(int n, double a, double b);

// Product rule on S^2: Gauss-Legendre in cos(theta) times uniform phi.
struct AngularGrid {
  std::vector<double> cos_theta, phi, weight;
  std::size_t size() const { return weight.size(); }
  Vec3 direction(std::size_t i) const;
};
// Exact for band limit 2*lmax + 1 with (lmax + 2) x (2 lmax + 3) points.
AngularGrid angular_grid(int lmax);
// Product rule with explicit sizes.
AngularGrid angular_grid(int n_theta, int n_phi);

enum class RadialKind { Polynomial, Slater };

struct RadialFamily {
  RadialKind kind = RadialKind::Polynomial;
  int max_degree = 0;
  double radius = 1.0;
  double slater_eta = 1.0;
};

// chi_n(r) and chi_n'(r); OutOfRange outside [0, R] or n outside [0, N].
std::pair<double, double> radial_basis_eval(const RadialFamily& family, int n, double r);
// chi_0..chi_N and derivatives at r, without range checks.
void radial_basis_all(const RadialFamily& family, double r, double* value, double* deriv);

double double_factorial(int n);

}  // namespace apwdg
