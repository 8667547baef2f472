#pragma once

#include <cstddef>
#include <vector>

#include "apwdg/common.hpp"

namespace apwdg {

// Dense column-major storage, laid out for LAPACK.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* col(std::size_t j) { return data_.data() + j * rows_; }
  const T* col(std::size_t j) const { return data_.data() + j * rows_; }

  void release() {
    data_.clear();
    data_.shrink_to_fit();
    rows_ = cols_ = 0;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using CMatrix = Matrix<cplx>;
using RMatrix = Matrix<double>;

inline double conj_if(double x) { return x; }
inline cplx conj_if(const cplx& x) { return std::conj(x); }
inline double real_part(double x) { return x; }
inline double real_part(const cplx& x) { return x.real(); }

// Copies the upper triangle into the lower one (conjugated for complex).
template <class T>
void mirror_upper(Matrix<T>& a) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) a(i, j) = conj_if(a(j, i));
}

template <class T>
double max_abs(const Matrix<T>& a) {
  double m = 0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

template <class T>
double hermiticity_defect(const Matrix<T>& a) {
  double d = 0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i <= j; ++i) d = std::max(d, std::abs(a(i, j) - conj_if(a(j, i))));
  return d;
}

// y = A x for a full (mirrored) matrix.
CVector matvec(const CMatrix& a, const CVector& x);
CVector matvec(const RMatrix& a, const CVector& x);

// x^H A y
cplx form(const CMatrix& a, const CVector& x, const CVector& y);
cplx form(const RMatrix& a, const CVector& x, const CVector& y);

cplx dot(const CVector& x, const CVector& y);  // x^H y
double norm2(const CVector& x);

}  // namespace apwdg
