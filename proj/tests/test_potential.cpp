#include <cstdio>
#include <fstream>
#include <random>

#include "apwdg/potential.hpp"
#include "apwdg/specialfn.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace apwdg;

namespace {

std::string temp_path(const std::string& name) {
  return (std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp")) + "/apwdg_test_" + name;
}

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("Ewald sum matches an independent split") {
    const EwaldKernel ew(10.0);
    const oracle::Ewald ref(10.0, 0.55);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 25; ++i) {
      const Vec3 d{u(rng), u(rng), u(rng)};
      CHECK(ew.phi(d) == doctest::Approx(ref.phi(d)).epsilon(1e-10));
    }
    for (const Vec3& d : {Vec3{0, 0, 0}, Vec3{0.3, 0, 0}, Vec3{0.1, -0.2, 0.4}})
      CHECK(ew.phi_regular(d) == doctest::Approx(ref.phi_regular(d)).epsilon(1e-10));
  }

  TEST_CASE("Ewald result does not depend on the splitting parameter") {
    const EwaldKernel a(7.0, 0.4), b(7.0, 0.9);
    for (const Vec3& d : {Vec3{1, 2, -0.5}, Vec3{3.4, 3.4, 3.4}, Vec3{0.01, 0, 0}})
      CHECK(a.phi(d) == doctest::Approx(b.phi(d)).epsilon(1e-11));
  }

  TEST_CASE("Ewald potential is periodic and averages to zero") {
    const double D = 6.0;
    const EwaldKernel ew(D);
    const Vec3 d{0.7, -1.1, 2.0};
    CHECK(ew.phi(d) == doctest::Approx(ew.phi(d + Vec3{D, 0, -D})).epsilon(1e-12));
    const auto q = gauss_legendre(24, -D / 2, D / 2);
    double mean = 0;
    // the 1/r singularity sits at a node-free point
    for (std::size_t i = 0; i < q.nodes.size(); ++i)
      for (std::size_t j = 0; j < q.nodes.size(); ++j)
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
          mean += q.weights[i] * q.weights[j] * q.weights[k] * ew.phi({q.nodes[i], q.nodes[j], q.nodes[k]});
    CHECK(std::abs(mean / (D * D * D)) < 2e-2);
  }

  TEST_CASE("Coulomb Fourier coefficients") {
    const UnitCell cell(10.0);
    const Vec3 c{0.5, -1.0, 0.25};
    const auto spec = periodized_coulomb_fourier(cell, {AtomicSite{c, 1.0, 2.0}}, 4);
    CHECK(spec.fourier({0, 0, 0}) == cplx(0.0));
    for (const IVec3& n : {IVec3{1, 0, 0}, IVec3{1, -2, 1}, IVec3{0, 0, 4}}) {
      const Vec3 k = Vec3{double(n.n1), double(n.n2), double(n.n3)} * cell.dk();
      const cplx want = -2.0 * 4 * kPi / (std::sqrt(1000.0) * k.dot(k)) * std::exp(cplx(0, -k.dot(c)));
      CHECK(std::abs(spec.fourier(n) - want) < 1e-14);
      CHECK(std::abs(spec.fourier(-n) - std::conj(spec.fourier(n))) < 1e-15);
    }
    CHECK(spec.fourier({3, 3, 0}) == cplx(0.0));  // beyond the cutoff
    CHECK(spec.coulomb_fourier({3, 3, 0}) != cplx(0.0));
  }

  TEST_CASE("pointwise evaluation is the Ewald potential of the nuclei") {
    const UnitCell cell(8.0);
    const std::vector<AtomicSite> sites{{{-1, 0, 0}, 0.8, 1.0}, {{1.5, 0.5, 0}, 0.6, 3.0}};
    const auto spec = periodized_coulomb_fourier(cell, sites, 2);
    const oracle::Ewald ref(8.0, 0.6);
    const Vec3 r{0.2, 2.2, -3.1};
    const double want = -ref.phi(r - sites[0].center) - 3.0 * ref.phi(r - sites[1].center);
    CHECK(evaluate_potential_point(spec, r) == doctest::Approx(want).epsilon(1e-10));
    const Vec3 near = sites[1].center + Vec3{0.1, 0.05, 0};
    CHECK(smooth_remainder(spec, 1, near) ==
          doctest::Approx(evaluate_potential_point(spec, near) + 3.0 / Vec3{0.1, 0.05, 0}.norm()).epsilon(1e-12));
  }

  TEST_CASE("Fourier file round trip and hermiticity check") {
    const std::string path = temp_path("fourier_ok.csv");
    {
      std::ofstream f(path);
      f << "n1,n2,n3,re,im\n0,0,0,-0.5,0\n1,0,0,0.1,0.2\n-1,0,0,0.1,-0.2\n";
    }
    const FourierGrid g = read_fourier_csv(path);
    CHECK(g.kmax() == 1);
    CHECK(g({1, 0, 0}) == cplx(0.1, 0.2));
    CHECK(g({0, 1, 0}) == cplx(0.0));
    CHECK(g.reality_defect() == 0.0);
    const auto spec = fourier_potential(UnitCell(5.0), {}, g, 1);
    const Vec3 r{0.3, 0.1, 0.0};
    const double kx = 2 * kPi / 5.0;
    const double want = (-0.5 + 2 * (0.1 * std::cos(kx * 0.3) - 0.2 * std::sin(kx * 0.3))) / std::sqrt(125.0);
    CHECK(evaluate_potential_point(spec, r) == doctest::Approx(want).epsilon(1e-13));

    const std::string bad = temp_path("fourier_bad.csv");
    {
      std::ofstream f(bad);
      f << "1,0,0,0.1,0.2\n-1,0,0,0.1,0.2\n";
    }
    CHECK_THROWS_AS(read_fourier_csv(bad), Error);
    CHECK_THROWS_AS(read_fourier_csv(temp_path("does_not_exist.csv")), Error);
    std::remove(path.c_str());
    std::remove(bad.c_str());
  }

  TEST_CASE("sphere expansion reconstructs the potential") {
    const UnitCell cell(10.0);
    const std::vector<AtomicSite> sites{{{0, 0, 0}, 1.0, 1.0}};
    auto spec = periodized_coulomb_fourier(cell, sites, 6);
    FourierGrid extra(2);
    extra.at({1, 0, 0}) = cplx(0.3, 0.1);
    extra.at({-1, 0, 0}) = cplx(0.3, -0.1);
    extra.at({0, 1, 1}) = cplx(-0.2, 0.0);
    extra.at({0, -1, -1}) = cplx(-0.2, 0.0);
    spec.extra = extra;
    const std::vector<double> nodes{0.05, 0.4, 0.9, 1.0};
    const auto exp = sphere_expansion(spec, 0, 8, nodes);
    CHECK(exp.singular_charge == 1.0);
    const oracle::Ewald ref(10.0, 0.5);
    std::mt19937 rng(11);
    std::normal_distribution<double> g;
    for (int t = 0; t < 10; ++t) {
      Vec3 dir{g(rng), g(rng), g(rng)};
      dir = dir * (1.0 / dir.norm());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Vec3 r = dir * nodes[i];
        double want = -ref.phi(r);
        extra.for_each([&](const IVec3& n, const cplx& v) {
          const Vec3 k = Vec3{double(n.n1), double(n.n2), double(n.n3)} * cell.dk();
          want += (v * std::exp(cplx(0, k.dot(r)))).real() / std::sqrt(cell.volume());
        });
        CHECK(exp.reconstruct(i, dir) == doctest::Approx(want).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("an on-center nucleus has a cubic remainder") {
    const auto spec = periodized_coulomb_fourier(UnitCell(10.0), {AtomicSite{{0, 0, 0}, 1.0, 1.0}}, 4);
    const auto exp = sphere_expansion(spec, 0, 8, {0.5, 1.0});
    for (int l : {1, 2, 3, 5, 7}) CHECK(exp.degree_norm(l) < 1e-10);
    CHECK(exp.degree_norm(0) > 1e-3);
    CHECK(exp.degree_norm(4) > 1e-8);
  }

  TEST_CASE("Hartree potential solves the Poisson equation in Fourier space") {
    const UnitCell cell(10.0);
    FourierGrid rho(2);
    rho.at({0, 0, 0}) = 0.7;
    rho.at({1, 0, 0}) = cplx(0.2, 0.1);
    rho.at({-1, 0, 0}) = cplx(0.2, -0.1);
    rho.at({1, 1, 0}) = 0.05;
    const auto vh = hartree_fourier(cell, rho);
    CHECK(vh({0, 0, 0}) == cplx(0.0));
    const double k2 = cell.dk() * cell.dk();
    CHECK(std::abs(vh({1, 0, 0}) * k2 - 4 * kPi * cplx(0.2, 0.1)) < 1e-13);
    CHECK(std::abs(vh({1, 1, 0}) * 2.0 * k2 - 4 * kPi * 0.05) < 1e-13);
    CHECK(hartree_fourier(cell, FourierGrid()).empty());
  }

  TEST_CASE("Fourier grid arithmetic") {
    FourierGrid a(1), b(2);
    a.at({0, 0, 1}) = 1.0;
    b.at({0, 0, 1}) = 2.0;
    b.at({2, 0, 0}) = 3.0;
    a.axpy(0.5, b);
    CHECK(a.kmax() == 2);
    CHECK(a({0, 0, 1}) == cplx(2.0));
    CHECK(a({2, 0, 0}) == cplx(1.5));
    a.scale(2.0);
    CHECK(a.l2_norm() == doctest::Approx(5.0));
    CHECK(a.reality_defect() == doctest::Approx(4.0));
  }
}
