#include "apwdg/solver.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#define LAPACK_COMPLEX_CPP
#include <cblas.h>
#include <lapacke.h>

namespace apwdg {

namespace {

lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

constexpr double kRefineThreshold = 1e-11;

struct Residuals {
  std::vector<double> absolute, relative;
};

CMatrix hemm(const CMatrix& A, const CMatrix& X) {
  const int n = static_cast<int>(A.rows()), k = static_cast<int>(X.cols());
  CMatrix Y(A.rows(), X.cols());
  const cplx one = 1.0, zero = 0.0;
  cblas_zhemm(CblasColMajor, CblasLeft, CblasUpper, n, k, &one, A.data(), n, X.data(), n, &zero, Y.data(), n);
  return Y;
}

// X^H Y
CMatrix inner(const CMatrix& X, const CMatrix& Y) {
  const int n = static_cast<int>(X.rows()), k = static_cast<int>(X.cols());
  CMatrix G(X.cols(), Y.cols());
  const cplx one = 1.0, zero = 0.0;
  cblas_zgemm(CblasColMajor, CblasConjTrans, CblasNoTrans, k, static_cast<int>(Y.cols()), n, &one, X.data(), n,
              Y.data(), n, &zero, G.data(), k);
  return G;
}

Residuals residuals(const CMatrix& H, const CMatrix& M, const CMatrix& X, const std::vector<double>& w) {
  const CMatrix HX = hemm(H, X), MX = hemm(M, X);
  Residuals r;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double r2 = 0, h2 = 0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      r2 += std::norm(HX(i, j) - w[j] * MX(i, j));
      h2 += std::norm(HX(i, j));
    }
    r.absolute.push_back(std::sqrt(r2));
    r.relative.push_back(h2 > 0 ? std::sqrt(r2 / h2) : std::sqrt(r2));
  }
  return r;
}

// One step of shifted inverse subspace iteration followed by Rayleigh-Ritz.
bool refine(const CMatrix& H, const CMatrix& M, CMatrix& X, std::vector<double>& w) {
  const std::size_t n = H.rows(), k = X.cols();
  const lapack_int ln = static_cast<lapack_int>(n);
  const double spread = w.back() - w.front();
  const double mu = w.front() - std::max(0.1 * spread, 1e-3 * std::max(1.0, std::abs(w.front())));
  CMatrix S(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) S(i, j) = H(i, j) - mu * M(i, j);
  std::vector<lapack_int> ipiv(n);
  if (LAPACKE_zhetrf(LAPACK_COL_MAJOR, 'U', ln, lp(S.data()), ln, ipiv.data()) != 0) return false;
  CMatrix Y = hemm(M, X);
  if (LAPACKE_zhetrs(LAPACK_COL_MAJOR, 'U', ln, static_cast<lapack_int>(k), lp(S.data()), ln, ipiv.data(),
                     lp(Y.data()), ln) != 0)
    return false;
  S.release();
  CMatrix Hs = inner(Y, hemm(H, Y)), Ms = inner(Y, hemm(M, Y));
  const lapack_int lk = static_cast<lapack_int>(k);
  std::vector<double> ws(k);
  if (LAPACKE_zhegv(LAPACK_COL_MAJOR, 1, 'V', 'U', lk, lp(Hs.data()), lk, lp(Ms.data()), lk, ws.data()) != 0)
    return false;
  const cplx one = 1.0, zero = 0.0;
  CMatrix Xn(n, k);
  cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, ln, lk, lk, &one, Y.data(), ln, Hs.data(), lk, &zero,
              Xn.data(), ln);
  X = std::move(Xn);
  w = ws;
  return true;
}

}  // namespace

CVector EigenSolution::vector(std::size_t i) const {
  if (i >= eigenvalues.size()) throw Error(ErrorCode::InvalidIndex, "eigenpair index out of range");
  return CVector(eigenvectors.col(i), eigenvectors.col(i) + eigenvectors.rows());
}

void normalize_phases(CMatrix& vectors) {
  const std::size_t n = vectors.rows();
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    cplx* c = vectors.col(j);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(c[i]) > std::abs(c[best]) * (1.0 + 1e-12)) best = i;
    if (n == 0 || std::abs(c[best]) == 0.0) continue;
    const cplx ph = std::conj(c[best]) / std::abs(c[best]);
    for (std::size_t i = 0; i < n; ++i) c[i] *= ph;
  }
}

EigenSolution solve_generalized(const CMatrix& H, const CMatrix& M, int nev, double cond_limit) {
  const std::size_t n = H.rows();
  if (H.cols() != n || M.rows() != n || M.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "H and M must be square and of equal size");
  if (nev < 1 || static_cast<std::size_t>(nev) > n)
    throw Error(ErrorCode::InvalidArgument, "nev must lie in [1, dim]");
  const lapack_int ln = static_cast<lapack_int>(n);

  CMatrix U = M;
  const double anorm = LAPACKE_zlanhe(LAPACK_COL_MAJOR, '1', 'U', ln, lp(U.data()), ln);
  lapack_int info = LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'U', ln, lp(U.data()), ln);
  if (info > 0) {
    std::ostringstream msg;
    msg << "mass matrix is not positive definite: pivot " << info << " = " << U(info - 1, info - 1).real()
        << "; lower K to remove near-dependent plane waves";
    throw Error(ErrorCode::MassNotPositiveDefinite, msg.str());
  }
  if (info < 0) throw Error(ErrorCode::InvalidArgument, "zpotrf rejected its arguments");
  double smallest_pivot = U(0, 0).real();
  for (std::size_t i = 1; i < n; ++i) smallest_pivot = std::min(smallest_pivot, U(i, i).real());
  double rcond = 0.0;
  LAPACKE_zpocon(LAPACK_COL_MAJOR, 'U', ln, lp(U.data()), ln, anorm, &rcond);
  const double cond = rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (cond > cond_limit) {
    std::ostringstream msg;
    msg << "mass matrix condition " << cond << " exceeds " << cond_limit << " (smallest Cholesky pivot "
        << smallest_pivot * smallest_pivot << "); lower K to remove near-dependent plane waves";
    throw Error(ErrorCode::MassNotPositiveDefinite, msg.str());
  }

  CMatrix A = H;
  info = LAPACKE_zhegst(LAPACK_COL_MAJOR, 1, 'U', ln, lp(A.data()), ln, lp(U.data()), ln);
  if (info != 0) throw Error(ErrorCode::ConvergenceFailure, "zhegst failed");

  EigenSolution out;
  out.mass_condition = cond;
  std::vector<double> w(n);
  CMatrix Z(n, nev);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(nev));
  lapack_int found = 0;
  info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', ln, lp(A.data()), ln, 0.0, 0.0, 1, nev, 0.0, &found,
                        w.data(), lp(Z.data()), ln, support.data());
  if (info != 0 || found != nev) {
    std::ostringstream msg;
    msg << "dense eigensolver failed (info " << info << ", found " << found << " of " << nev << ")";
    throw Error(ErrorCode::ConvergenceFailure, msg.str());
  }
  A.release();
  info = LAPACKE_ztrtrs(LAPACK_COL_MAJOR, 'U', 'N', 'N', ln, nev, lp(U.data()), ln, lp(Z.data()), ln);
  if (info != 0) throw Error(ErrorCode::ConvergenceFailure, "back-substitution failed");
  U.release();
  w.resize(nev);
  Residuals res = residuals(H, M, Z, w);
  if (*std::max_element(res.relative.begin(), res.relative.end()) > kRefineThreshold) {
    std::vector<double> w2 = w;
    CMatrix Z2 = Z;
    if (refine(H, M, Z2, w2)) {
      Residuals res2 = residuals(H, M, Z2, w2);
      if (*std::max_element(res2.relative.begin(), res2.relative.end()) <
          *std::max_element(res.relative.begin(), res.relative.end())) {
        Z = std::move(Z2);
        w = std::move(w2);
        res = std::move(res2);
      }
    }
  }
  normalize_phases(Z);
  out.eigenvalues = w;
  out.residual_norms = res.absolute;
  out.relative_residuals = res.relative;
  out.irreps.assign(nev, 0);
  out.eigenvectors = std::move(Z);
  return out;
}

EigenSolution solve_lowest(const AssembledOperators& ops, int nev) { return solve_generalized(ops.H, ops.M, nev); }

bool eigenvalues_above(const CMatrix& H, const CMatrix& M, double shift) {
  const std::size_t n = H.rows();
  CMatrix S(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) S(i, j) = H(i, j) - shift * M(i, j);
  const lapack_int ln = static_cast<lapack_int>(n);
  return LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'U', ln, lp(S.data()), ln) == 0;
}

double rayleigh_quotient(const CMatrix& H, const CMatrix& M, const CVector& v) {
  if (v.size() != H.rows()) throw Error(ErrorCode::InvalidArgument, "vector length does not match the operators");
  if (norm2(v) == 0.0) throw Error(ErrorCode::ZeroVector, "Rayleigh quotient of the zero vector");
  const double den = form(M, v, v).real();
  if (!(den > 0)) throw Error(ErrorCode::ZeroVector, "vector has zero mass norm");
  return form(H, v, v).real() / den;
}

double rayleigh_quotient(const AssembledOperators& ops, const CVector& v) {
  return rayleigh_quotient(ops.H, ops.M, v);
}

}  // namespace apwdg
