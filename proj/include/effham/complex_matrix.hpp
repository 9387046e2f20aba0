#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "effham/error.hpp"

namespace effham {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Dense row-major complex matrix. Everything in this library lives in
/// dimensions of a few dozen at most, so no blocking or views, just values.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  cplx* data() noexcept { return a_.data(); }
  const cplx* data() const noexcept { return a_.data(); }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_)
      throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
    CMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      const cplx* ai = a.a_.data() + i * a.cols_;
      cplx* ci = c.a_.data() + i * b.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = ai[k];
        if (aik == cplx{}) continue;
        const cplx* bk = b.a_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j) ci[j] += aik * bk[j];
      }
    }
    return c;
  }

  CMatrix adjoint() const {
    CMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  CMatrix transpose() const {
    CMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
  }

  /// Elementwise complex conjugate in the fixed basis.
  CMatrix conjugate() const {
    CMatrix m(rows_, cols_);
    for (std::size_t k = 0; k < a_.size(); ++k) m.a_[k] = std::conj(a_[k]);
    return m;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& x : a_) s += std::norm(x);
    return std::sqrt(s);
  }

  /// Maximum absolute column sum; the norm the expm scaling bound wants.
  double one_norm() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  double max_abs() const {
    double best = 0.0;
    for (const auto& x : a_) best = std::max(best, std::abs(x));
    return best;
  }

  double hermiticity_defect() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        best = std::max(best, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return best;
  }

  bool is_hermitian(double tol) const { return rows_ == cols_ && hermiticity_defect() <= tol; }

  CMatrix hermitized() const {
    CMatrix m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return m;
  }

  CVector column(std::size_t j) const {
    CVector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  CVector row(std::size_t i) const {
    CVector v(cols_);
    for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
    return v;
  }

  void set_column(std::size_t j, const CVector& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
  }

  void set_row(std::size_t i, const CVector& v) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }

 private:
  void require_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorCode::DimensionMismatch, "matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
    }
  return k;
}

inline CVector matvec(const CMatrix& a, const CVector& v) {
  if (a.cols() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
  CVector w(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s = 0.0;
    const cplx* ai = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * v[j];
    w[i] = s;
  }
  return w;
}

/// Row-times-column pairing without conjugation; the natural product between a
/// left (row) eigenvector and a right (column) eigenvector.
inline cplx dot_bilinear(const CVector& l, const CVector& r) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) s += l[i] * r[i];
  return s;
}

/// Hermitian inner product, first argument conjugated.
inline cplx dot_conj(const CVector& a, const CVector& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm2(const CVector& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline CVector operator-(CVector a, const CVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline CVector operator+(CVector a, const CVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline CVector operator*(cplx s, CVector v) {
  for (auto& x : v) x *= s;
  return v;
}

/// LU factorization with partial pivoting. `pivot_floor > 0` replaces
/// vanishing pivots instead of failing, which is exactly what inverse
/// iteration on a singular shift needs.
struct LuFactors {
  CMatrix lu;
  std::vector<std::size_t> perm;
};

inline LuFactors lu_factor(CMatrix a, double pivot_floor = 0.0) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "lu_factor needs square");
  const std::size_t n = a.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(perm[k], perm[p]);
    }
    if (std::abs(a(k, k)) <= pivot_floor) {
      if (pivot_floor <= 0.0)
        throw Error(ErrorCode::NonDiagonalizable, "singular matrix in lu_factor");
      a(k, k) = pivot_floor;
    }
    const cplx inv = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx m = a(i, k) * inv;
      a(i, k) = m;
      if (m == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
    }
  }
  return {std::move(a), std::move(perm)};
}

inline CVector lu_solve(const LuFactors& f, const CVector& b) {
  const std::size_t n = f.lu.rows();
  CVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

inline CMatrix lu_solve(const LuFactors& f, const CMatrix& b) {
  CMatrix x(b.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) x.set_column(j, lu_solve(f, b.column(j)));
  return x;
}

inline CMatrix solve(const CMatrix& a, const CMatrix& b) { return lu_solve(lu_factor(a), b); }

inline CMatrix inverse(const CMatrix& a) { return solve(a, CMatrix::identity(a.rows())); }

}  // namespace effham
