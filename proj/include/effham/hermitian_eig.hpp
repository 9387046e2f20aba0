#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "effham/complex_matrix.hpp"

namespace effham {

struct HermitianEig {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // orthonormal columns, aligned with values
};

/// Cyclic Jacobi diagonalization for Hermitian matrices. Each (p,q) sweep
/// phases the off-diagonal entry real and applies the classic symmetric
/// rotation; quadratic convergence, unconditionally stable.
inline HermitianEig hermitian_eig(const CMatrix& a_in) {
  if (a_in.rows() != a_in.cols())
    throw Error(ErrorCode::DimensionMismatch, "hermitian_eig needs square");
  const std::size_t n = a_in.rows();
  CMatrix a = a_in.hermitized();
  CMatrix v = CMatrix::identity(n);
  const double scale = a.frobenius_norm();

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (std::sqrt(off) <= 1e-15 * (scale > 0 ? scale : 1.0)) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const cplx ph = apq / mag;  // a(p,q) = mag * ph
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U = diag(1, conj(ph)) * [[c, s], [-s, c]]; U† A U zeroes a(p,q).
        for (std::size_t j = 0; j < n; ++j) {
          const cplx t1 = a(p, j), t2 = a(q, j);
          a(p, j) = c * t1 - s * ph * t2;
          a(q, j) = s * t1 + c * ph * t2;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const cplx t1 = a(i, p), t2 = a(i, q);
          a(i, p) = c * t1 - s * std::conj(ph) * t2;
          a(i, q) = s * t1 + c * std::conj(ph) * t2;
          const cplx w1 = v(i, p), w2 = v(i, q);
          v(i, p) = c * w1 - s * std::conj(ph) * w2;
          v(i, q) = s * w1 + c * std::conj(ph) * w2;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });

  HermitianEig out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = d[order[j]];
    out.vectors.set_column(j, v.column(order[j]));
  }
  return out;
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues below `clamp_floor` are treated as zero.
inline CMatrix psd_sqrt(const CMatrix& a, double clamp_floor = 0.0) {
  const HermitianEig e = hermitian_eig(a);
  const std::size_t n = a.rows();
  CMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = e.values[k] > clamp_floor ? e.values[k] : 0.0;
    const double s = std::sqrt(lam);
    if (s == 0.0) continue;
    const CVector u = e.vectors.column(k);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r(i, j) += s * u[i] * std::conj(u[j]);
  }
  return r;
}

}  // namespace effham
