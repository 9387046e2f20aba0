#pragma once

#include <cmath>
#include <vector>

#include "effham/complex_matrix.hpp"
#include "effham/hermitian_eig.hpp"

namespace effham {

/// Orthonormal basis (columns) of { v : ||a v|| <= tol * ||a|| }.
///
/// Rank is estimated by complete-pivoting elimination and confirmed against
/// the singular values of a (via the Hermitian spectrum of a†a); the returned
/// basis consists of the singular vectors below the threshold, which is both
/// orthonormal and optimal. Disagreement between the two rank estimates is
/// resolved in favor of the singular values.
inline CMatrix null_space(const CMatrix& a, double tol = 1e-10) {
  const std::size_t rows = a.rows(), n = a.cols();
  const double anorm = a.frobenius_norm();
  if (anorm == 0.0) return CMatrix::identity(n);
  const double thresh = tol * anorm;

  // Complete-pivoting elimination rank estimate.
  CMatrix w = a;
  std::size_t rank_elim = 0;
  {
    const std::size_t kmax = std::min(rows, n);
    std::vector<std::size_t> colperm(n);
    for (std::size_t j = 0; j < n; ++j) colperm[j] = j;
    for (std::size_t k = 0; k < kmax; ++k) {
      std::size_t pi = k, pj = k;
      double best = 0.0;
      for (std::size_t i = k; i < rows; ++i)
        for (std::size_t j = k; j < n; ++j)
          if (std::abs(w(i, j)) > best) {
            best = std::abs(w(i, j));
            pi = i;
            pj = j;
          }
      if (best <= thresh) break;
      if (pi != k)
        for (std::size_t j = 0; j < n; ++j) std::swap(w(k, j), w(pi, j));
      if (pj != k) {
        for (std::size_t i = 0; i < rows; ++i) std::swap(w(i, k), w(i, pj));
        std::swap(colperm[k], colperm[pj]);
      }
      ++rank_elim;
      const cplx inv = 1.0 / w(k, k);
      for (std::size_t i = k + 1; i < rows; ++i) {
        const cplx m = w(i, k) * inv;
        if (m == cplx{}) continue;
        for (std::size_t j = k; j < n; ++j) w(i, j) -= m * w(k, j);
      }
    }
  }

  // Singular-vector confirmation. The singular vectors come from a†a, but
  // membership is decided by the direct residual ||a v||: squaring loses half
  // the digits, so thresholding sqrt(eig(a†a)) could not resolve tolerances
  // below sqrt(eps)*||a||.
  const HermitianEig gram = hermitian_eig(a.adjoint() * a);
  std::vector<CVector> keep;
  for (std::size_t k = 0; k < n; ++k) {
    CVector v = gram.vectors.column(k);
    if (norm2(matvec(a, v)) <= thresh) keep.push_back(std::move(v));
  }
  (void)rank_elim;  // n - rank_elim should match; the residual test decides.

  CMatrix basis(n, keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) basis.set_column(j, keep[j]);
  return basis;
}

}  // namespace effham
