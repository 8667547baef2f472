#include <random>

#include "apwdg/scf.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace apwdg;

namespace {

EigenSolution single_orbital(const CVector& u) {
  EigenSolution s;
  s.eigenvalues = {0.0};
  s.eigenvectors = CMatrix(u.size(), 1);
  for (std::size_t i = 0; i < u.size(); ++i) s.eigenvectors(i, 0) = u[i];
  s.residual_norms = s.relative_residuals = {0.0};
  s.irreps = {0};
  return s;
}

// occ * int |u|^2 conj(e_g) by splitting into the whole cell (analytic for the plane-wave
// part) and a ball correction by spherical product quadrature.
cplx brute_density(const MixedBasis& b, const CVector& u, double occ, const IVec3& g) {
  const double vol = b.cell().volume();
  const Vec3 gk = make_wavevector(b.cell(), g).k;
  cplx cell_part = 0;
  for (std::size_t p = 0; p < b.n_pw(); ++p)
    for (std::size_t q = 0; q < b.n_pw(); ++q)
      if (b.pw()[q].n - b.pw()[p].n == g) cell_part += std::conj(u[p]) * u[q];
  const auto& site = b.sites()[0];
  const auto rr = oracle::gauss(40, 0.0, site.radius);
  const auto ct = oracle::gauss(40, -1.0, 1.0);
  const int nphi = 80;
  cplx ball = 0;
  for (const auto& r : rr)
    for (const auto& c : ct)
      for (int k = 0; k < nphi; ++k) {
        const double ph = 2 * kPi * k / nphi, s = std::sqrt(1 - c.x * c.x);
        const Vec3 off = Vec3{s * std::cos(ph), s * std::sin(ph), c.x} * r.x;
        const Vec3 x = site.center + off;
        const double w = r.w * c.w * (2 * kPi / nphi) * r.x * r.x;
        const cplx phase = std::exp(cplx(0, -gk.dot(x)));
        ball += w * phase * (std::norm(eval_sphere_part(b, u, 0, off)) - std::norm(eval_pw_part(b, u, x)));
      }
  return occ * (cell_part + ball) / std::sqrt(vol);
}

}  // namespace

TEST_SUITE("scf") {
  TEST_CASE("density transform matches brute-force quadrature") {
    BasisParams p;
    p.K = 2;
    p.N = 3;
    p.L = 2;
    const auto b = build_mixed_basis(UnitCell(6.0), {AtomicSite{{0.3, -0.2, 0.1}, 1.0, 1.0}}, p);
    std::mt19937 rng(4);
    std::normal_distribution<double> gd;
    CVector u(b->total_dim());
    for (auto& x : u) x = {gd(rng), gd(rng)};
    const FourierGrid rho = density_fourier(*b, single_orbital(u), {2.0}, 0, 3);
    for (const IVec3& g : {IVec3{0, 0, 0}, IVec3{1, 0, 0}, IVec3{-1, 2, 0}, IVec3{0, 1, -1}, IVec3{3, 0, 0}}) {
      // the transform is symmetrized, so compare against the Hermitian part
      const cplx want = 0.5 * (brute_density(*b, u, 2.0, g) + std::conj(brute_density(*b, u, 2.0, -g)));
      CHECK(std::abs(rho(g) - want) < 1e-9 * std::abs(rho({0, 0, 0})));
    }
    CHECK(rho.reality_defect() < 1e-14);
  }

  TEST_CASE("charge of an M-normalized orbital equals the occupation") {
    BasisParams p;
    p.K = 3;
    p.N = 4;
    p.L = 2;
    const UnitCell cell(8.0);
    const std::vector<AtomicSite> sites{{{0, 0, 0}, 1.0, 1.0}};
    const DgSystem sys(build_mixed_basis(cell, sites, p), periodized_coulomb_fourier(cell, sites, 6), {});
    const auto sol = sys.solve(2);
    for (double occ : {1.0, 2.0}) {
      const FourierGrid rho = density_fourier(sys.basis(), sol, {occ}, 0, 6);
      CHECK(rho({0, 0, 0}).real() * std::sqrt(cell.volume()) == doctest::Approx(occ).epsilon(1e-12));
    }
    const FourierGrid two = density_fourier(sys.basis(), sol, {1.0, 1.0}, 0, 6);
    CHECK(two({0, 0, 0}).real() * std::sqrt(cell.volume()) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(density_fourier(sys.basis(), sol, {1, 1, 1}, 0, 6), Error);
  }

  TEST_CASE("coarse density grid is rejected") {
    BasisParams p;
    p.K = 2;
    ScfConfig c;
    c.density_grid = 8;
    c.k_pot = 4;
    try {
      scf_solve(UnitCell(6.0), {AtomicSite{{}, 1.0, 1.0}}, p, c);
      FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooCoarse);
    }
  }

  TEST_CASE("configuration validation") {
    ScfConfig c;
    CHECK_NOTHROW(c.validate());
    c.mixing_alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.mixing_alpha = 0.5;
    c.tol = -1;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("without Hartree coupling SCF reproduces the linear problem in one step") {
    BasisParams p;
    p.K = 3;
    p.N = 6;
    p.L = 2;
    const UnitCell cell(8.0);
    const std::vector<AtomicSite> sites{{{0, 0, 0}, 1.0, 2.0}};
    ScfConfig c;
    c.hartree_scale = 0.0;
    const auto st = scf_solve(cell, sites, p, c);
    CHECK(st.converged);
    CHECK(st.iterations == 1);
    const DgSystem sys(build_mixed_basis(cell, sites, p), periodized_coulomb_fourier(cell, sites, 12), {});
    CHECK(st.solution.eigenvalues[0] == doctest::Approx(sys.solve(1).eigenvalues[0]).epsilon(1e-12));
  }

  TEST_CASE("Hartree SCF converges and raises the orbital energy") {
    BasisParams p;
    p.K = 4;
    p.N = 8;
    p.L = 2;
    const UnitCell cell(8.0);
    const std::vector<AtomicSite> sites{{{0, 0, 0}, 1.0, 2.0}};
    ScfConfig c;
    c.tol = 1e-8;
    const auto st = scf_solve(cell, sites, p, c);
    CHECK(st.converged);
    CHECK(st.history.back().residual < 1e-8);
    CHECK(st.max_charge_error < 1e-10);
    ScfConfig off = c;
    off.hartree_scale = 0.0;
    CHECK(st.solution.eigenvalues[0] > scf_solve(cell, sites, p, off).solution.eigenvalues[0]);
  }

  TEST_CASE("non-convergence carries the iteration history") {
    BasisParams p;
    p.K = 3;
    p.N = 4;
    p.L = 2;
    ScfConfig c;
    c.max_iters = 2;
    c.tol = 1e-14;
    try {
      scf_solve(UnitCell(8.0), {AtomicSite{{}, 1.0, 2.0}}, p, c);
      FAIL("expected NotConverged");
    } catch (const ScfNotConverged& e) {
      CHECK(e.code() == ErrorCode::NotConverged);
      CHECK(e.state().history.size() == 2);
      CHECK_FALSE(e.state().converged);
    }
  }
}
