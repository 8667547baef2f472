#include <algorithm>
#include <random>

#include "apwdg/solver.hpp"
#include "doctest.h"

using namespace apwdg;

namespace {

CMatrix random_hermitian(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) a(i, j) = i == j ? cplx(g(rng), 0) : cplx(g(rng), g(rng));
  mirror_upper(a);
  return a;
}

CMatrix random_spd(std::size_t n, unsigned seed) {
  const CMatrix b = random_hermitian(n, seed);
  CMatrix m(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0;
      for (std::size_t k = 0; k < n; ++k) s += std::conj(b(k, i)) * b(k, j);
      m(i, j) = s + (i == j ? 0.5 : 0.0);
    }
  return m;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("diagonal problem returns sorted diagonal") {
    CMatrix H(4, 4), M(4, 4);
    const double d[] = {3.0, -1.0, 2.0, 0.5};
    for (int i = 0; i < 4; ++i) {
      H(i, i) = d[i];
      M(i, i) = 1.0;
    }
    const auto s = solve_generalized(H, M, 3);
    REQUIRE(s.size() == 3);
    CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.5));
    CHECK(s.eigenvalues[2] == doctest::Approx(2.0));
    CHECK(std::abs(s.eigenvectors(1, 0)) == doctest::Approx(1.0));
  }

  TEST_CASE("two by two generalized problem") {
    CMatrix H(2, 2), M(2, 2);
    H(0, 0) = 2;
    H(1, 1) = 2;
    H(0, 1) = H(1, 0) = 1;
    M(0, 0) = 2;
    M(1, 1) = 1;
    const auto s = solve_generalized(H, M, 2);
    CHECK(s.eigenvalues[0] == doctest::Approx((3 - std::sqrt(3.0)) / 2));
    CHECK(s.eigenvalues[1] == doctest::Approx((3 + std::sqrt(3.0)) / 2));
  }

  TEST_CASE("random Hermitian pencil: residuals, M-orthonormality, Rayleigh quotients") {
    const std::size_t n = 40;
    const CMatrix H = random_hermitian(n, 1), M = random_spd(n, 2);
    const auto s = solve_generalized(H, M, 10);
    REQUIRE(s.size() == 10);
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    for (std::size_t a = 0; a < s.size(); ++a) {
      const CVector va = s.vector(a);
      CHECK(s.relative_residuals[a] < 1e-12);
      CHECK(rayleigh_quotient(H, M, va) == doctest::Approx(s.eigenvalues[a]).epsilon(1e-12));
      const CVector hv = matvec(H, va), mv = matvec(M, va);
      double r = 0;
      for (std::size_t i = 0; i < n; ++i) r += std::norm(hv[i] - s.eigenvalues[a] * mv[i]);
      CHECK(std::abs(std::sqrt(r) - s.residual_norms[a]) < 1e-12);
      for (std::size_t b = 0; b < s.size(); ++b)
        CHECK(std::abs(form(M, va, s.vector(b)) - (a == b ? 1.0 : 0.0)) < 1e-12);
    }
    CHECK(eigenvalues_above(H, M, s.eigenvalues[0] - 1e-6));
    CHECK_FALSE(eigenvalues_above(H, M, s.eigenvalues[0] + 1e-6));
    CHECK(s.mass_condition >= 1.0);
  }

  TEST_CASE("eigenvalues are invariant under congruence") {
    const std::size_t n = 12;
    const CMatrix H = random_hermitian(n, 4), M = random_spd(n, 5);
    CMatrix H2 = H, M2 = M;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        H2(i, j) *= 3.0;
        M2(i, j) *= 3.0;
      }
    const auto a = solve_generalized(H, M, 5), b = solve_generalized(H2, M2, 5);
    for (int i = 0; i < 5; ++i) CHECK(a.eigenvalues[i] == doctest::Approx(b.eigenvalues[i]).epsilon(1e-12));
  }

  TEST_CASE("indefinite or ill-conditioned mass matrix is rejected") {
    CMatrix H(2, 2), M(2, 2);
    H(0, 0) = H(1, 1) = 1;
    M(0, 0) = 1;
    M(1, 1) = -1;
    try {
      solve_generalized(H, M, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MassNotPositiveDefinite);
    }
    M(1, 1) = 1e-15;
    CHECK_THROWS_AS(solve_generalized(H, M, 1), Error);
    M(1, 1) = 1e-6;
    CHECK_NOTHROW(solve_generalized(H, M, 1));
  }

  TEST_CASE("argument checks") {
    const CMatrix H = random_hermitian(3, 1), M = random_spd(3, 2);
    CHECK_THROWS_AS(solve_generalized(H, M, 0), Error);
    CHECK_THROWS_AS(solve_generalized(H, M, 4), Error);
    CHECK_THROWS_AS(solve_generalized(H, CMatrix(2, 2), 1), Error);
    try {
      rayleigh_quotient(H, M, CVector(3, 0.0));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroVector);
    }
  }

  TEST_CASE("phase normalization makes the largest component real positive") {
    CMatrix v(3, 1);
    v(0, 0) = {0.1, 0.2};
    v(1, 0) = {0.0, -2.0};
    v(2, 0) = {0.5, 0.0};
    normalize_phases(v);
    CHECK(v(1, 0).real() == doctest::Approx(2.0));
    CHECK(v(1, 0).imag() == doctest::Approx(0.0));
    CHECK(std::abs(v(0, 0)) == doctest::Approx(std::sqrt(0.05)));
  }
}
