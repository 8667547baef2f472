#include "apwdg/matrix.hpp"

#include <cblas.h>

namespace apwdg {

CVector matvec(const CMatrix& a, const CVector& x) {
  CVector y(a.rows());
  const cplx one(1.0), zero(0.0);
  cblas_zgemv(CblasColMajor, CblasNoTrans, static_cast<int>(a.rows()), static_cast<int>(a.cols()),
              &one, a.data(), static_cast<int>(a.rows()), x.data(), 1, &zero, y.data(), 1);
  return y;
}

CVector matvec(const RMatrix& a, const CVector& x) {
  const std::size_t n = a.cols();
  std::vector<double> re(n), im(n), yr(a.rows()), yi(a.rows());
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = x[i].real();
    im[i] = x[i].imag();
  }
  const int m = static_cast<int>(a.rows());
  cblas_dgemv(CblasColMajor, CblasNoTrans, m, static_cast<int>(n), 1.0, a.data(), m, re.data(), 1,
              0.0, yr.data(), 1);
  cblas_dgemv(CblasColMajor, CblasNoTrans, m, static_cast<int>(n), 1.0, a.data(), m, im.data(), 1,
              0.0, yi.data(), 1);
  CVector y(a.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = {yr[i], yi[i]};
  return y;
}

cplx dot(const CVector& x, const CVector& y) {
  cplx s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double norm2(const CVector& x) {
  double s = 0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

cplx form(const CMatrix& a, const CVector& x, const CVector& y) { return dot(x, matvec(a, y)); }
cplx form(const RMatrix& a, const CVector& x, const CVector& y) { return dot(x, matvec(a, y)); }

}  // namespace apwdg
