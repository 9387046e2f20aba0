#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "effham/complex_matrix.hpp"

namespace effham {

/// Full eigensystem of a general complex matrix.
///
/// Conventions: right vectors are unit columns, left vectors are rows, and
/// the bilinear pairing (no conjugation) satisfies l_i . r_j = delta_ij.
/// Eigenvalues closer than the cluster tolerance are treated as one
/// degenerate group and share a jointly biorthonormalized basis.
struct EigenSystem {
  CVector eigenvalues;
  CMatrix right_vectors;  // column j pairs with eigenvalues[j]
  CMatrix left_vectors;   // row j pairs with eigenvalues[j]
  double residual_norm = 0.0;
  std::vector<std::vector<std::size_t>> clusters;  // index groups, in output order
};

namespace detail {

/// Deterministic uniform doubles in [0,1); raw mt19937_64 output avoids the
/// implementation-defined std::*_distribution wrappers.
struct DetRng {
  explicit DetRng(std::uint64_t seed) : g_(seed) {}
  double uni() { return static_cast<double>(g_() >> 11) * 0x1p-53; }
  std::mt19937_64 g_;
};

inline void hessenberg_in_place(CMatrix& h) {
  const std::size_t n = h.rows();
  if (n < 3) return;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    CVector v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = h(k + 1 + i, k);
    const double xnorm = norm2(v);
    if (xnorm <= 1e-300) continue;
    const cplx ph = std::abs(v[0]) > 0 ? v[0] / std::abs(v[0]) : cplx(1.0);
    v[0] += ph * xnorm;
    const double vn2 = norm2(v) * norm2(v);
    if (vn2 <= 1e-300) continue;
    const double beta = 2.0 / vn2;
    // H <- P H, P = I - beta v v† acting on rows k+1..n-1.
    for (std::size_t j = k; j < n; ++j) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += std::conj(v[i]) * h(k + 1 + i, j);
      s *= beta;
      for (std::size_t i = 0; i < m; ++i) h(k + 1 + i, j) -= v[i] * s;
    }
    // H <- H P on columns k+1..n-1.
    for (std::size_t i = 0; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += h(i, k + 1 + j) * v[j];
      s *= beta;
      for (std::size_t j = 0; j < m; ++j) h(i, k + 1 + j) -= s * std::conj(v[j]);
    }
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

struct Givens {
  double c;
  cplx s;
};

inline Givens make_givens(cplx a, cplx b) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) return {1.0, 0.0};
  if (na == 0.0) return {0.0, std::conj(b) / nb};
  const double d = std::hypot(na, nb);
  return {na / d, (a / na) * std::conj(b) / (d)};
}

inline cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
  const cplx p = 0.5 * (a - d);
  cplx q = std::sqrt(p * p + b * c);
  if (std::abs(p - q) > std::abs(p + q)) q = -q;
  return d + p - q;
}

/// Eigenvalues of an upper Hessenberg matrix by explicitly shifted QR with
/// Givens rotations; h is destroyed.
inline CVector qr_eigenvalues(CMatrix h) {
  const std::size_t n = h.rows();
  CVector eig(n);
  if (n == 0) return eig;
  double hnorm = h.frobenius_norm();
  if (hnorm == 0.0) hnorm = 1.0;
  const double eps = 2.3e-16;

  std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
  int since_deflation = 0;
  long budget = 80 * static_cast<long>(n) + 200;
  std::vector<Givens> rot(n);

  while (hi >= 0) {
    if (hi == 0) {
      eig[0] = h(0, 0);
      break;
    }
    // Zero out negligible subdiagonals, then find the active block [lo, hi].
    std::ptrdiff_t lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      double ref = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (ref == 0.0) ref = hnorm;
      if (sub <= eps * ref) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eig[hi] = h(hi, hi);
      --hi;
      since_deflation = 0;
      continue;
    }
    if (hi - lo == 1) {
      // Closed form for the trailing 2x2.
      const cplx a = h(lo, lo), b = h(lo, hi), c = h(hi, lo), d = h(hi, hi);
      const cplx p = 0.5 * (a - d);
      cplx q = std::sqrt(p * p + b * c);
      eig[lo] = d + p + q;
      eig[hi] = d + p - q;
      hi -= 2;
      since_deflation = 0;
      continue;
    }
    if (--budget < 0) throw Error(ErrorCode::NoConvergence, "QR iteration stalled");

    cplx sigma;
    if (++since_deflation % 16 == 0) {
      sigma = h(hi, hi) + cplx(1.5 * std::abs(h(hi, hi - 1)));
    } else {
      sigma = wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
    }

    for (std::ptrdiff_t k = lo; k <= hi; ++k) h(k, k) -= sigma;
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const Givens g = make_givens(h(k, k), h(k + 1, k));
      rot[k] = g;
      for (std::ptrdiff_t j = k; j <= hi; ++j) {
        const cplx t1 = h(k, j), t2 = h(k + 1, j);
        h(k, j) = g.c * t1 + g.s * t2;
        h(k + 1, j) = -std::conj(g.s) * t1 + g.c * t2;
      }
      h(k + 1, k) = 0.0;
    }
    for (std::ptrdiff_t k = lo; k < hi; ++k) {
      const Givens g = rot[k];
      for (std::ptrdiff_t i = lo; i <= k + 1; ++i) {
        const cplx t1 = h(i, k), t2 = h(i, k + 1);
        h(i, k) = g.c * t1 + std::conj(g.s) * t2;
        h(i, k + 1) = -g.s * t1 + g.c * t2;
      }
    }
    for (std::ptrdiff_t k = lo; k <= hi; ++k) h(k, k) += sigma;
  }
  return eig;
}

/// Canonical orthonormal basis of the span of the (orthonormal) columns of s:
/// greedily orthonormalized projections of coordinate axes, so the result
/// depends only on the subspace, not on how it was found.
inline CMatrix canonicalize_subspace(const CMatrix& s) {
  const std::size_t n = s.rows(), m = s.cols();
  std::vector<CVector> proj(n);
  for (std::size_t j = 0; j < n; ++j) {
    CVector e(n);
    for (std::size_t k = 0; k < m; ++k) {
      const cplx w = std::conj(s(j, k));  // <s_k, e_j>
      for (std::size_t i = 0; i < n; ++i) e[i] += w * s(i, k);
    }
    proj[j] = std::move(e);
  }
  CMatrix out(n, m);
  std::vector<CVector> chosen;
  for (std::size_t c = 0; c < m; ++c) {
    double best = -1.0;
    std::size_t bj = 0;
    CVector bv;
    for (std::size_t j = 0; j < n; ++j) {
      CVector v = proj[j];
      for (const auto& u : chosen) {
        const cplx w = dot_conj(u, v);
        for (std::size_t i = 0; i < n; ++i) v[i] -= w * u[i];
      }
      const double nv = norm2(v);
      if (nv > best + 1e-14) {
        best = nv;
        bj = j;
        bv = std::move(v);
      }
    }
    (void)bj;
    // Repeat orthogonalization once for stability, normalize, fix the phase
    // of the largest entry to be real positive.
    for (const auto& u : chosen) {
      const cplx w = dot_conj(u, bv);
      for (std::size_t i = 0; i < n; ++i) bv[i] -= w * u[i];
    }
    const double nv = norm2(bv);
    const double inv = nv > 1e-300 ? 1.0 / nv : 0.0;
    for (auto& x : bv) x *= inv;
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(bv[i]) > amax + 1e-14) {
        amax = std::abs(bv[i]);
        imax = i;
      }
    if (amax > 0) {
      const cplx ph = std::conj(bv[imax]) / amax;
      for (auto& x : bv) x *= ph;
    }
    out.set_column(c, bv);
    chosen.push_back(out.column(c));
  }
  return out;
}

/// Orthonormal basis of the invariant subspace for one eigenvalue cluster by
/// subspace inverse iteration with a floored LU of (a - lambda I).
inline CMatrix cluster_subspace(const CMatrix& a, cplx lambda, std::size_t m, std::uint64_t seed) {
  const std::size_t n = a.rows();
  if (m >= n) return CMatrix::identity(n);
  CMatrix shifted = a;
  for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= lambda;
  double anorm = a.frobenius_norm();
  if (anorm == 0.0) anorm = 1.0;
  const LuFactors f = lu_factor(std::move(shifted), 2.3e-16 * anorm);

  DetRng rng(seed);
  CMatrix x(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) x(i, j) = cplx(rng.uni() - 0.5, rng.uni() - 0.5);

  auto orthonormalize = [&](CMatrix& q) {
    for (std::size_t j = 0; j < q.cols(); ++j) {
      CVector v = q.column(j);
      const double n0 = norm2(v);
      if (n0 > 1e-300)
        for (auto& e : v) e *= 1.0 / n0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < j; ++i) {
          const CVector u = q.column(i);
          const cplx w = dot_conj(u, v);
          for (std::size_t r = 0; r < v.size(); ++r) v[r] -= w * u[r];
        }
      const double nv = norm2(v);
      if (nv > 1e-300)
        for (auto& e : v) e *= 1.0 / nv;
      q.set_column(j, v);
    }
  };

  orthonormalize(x);
  for (int it = 0; it < 3; ++it) {
    x = lu_solve(f, x);
    orthonormalize(x);
  }
  return canonicalize_subspace(x);
}

}  // namespace detail

/// Eigendecomposition with left and right vectors of a general complex
/// square matrix. Eigenvalues come from Hessenberg + shifted QR, vectors from
/// per-cluster inverse iteration, and each degenerate cluster is jointly
/// re-biorthonormalized through its Gram block. Throws NonDiagonalizable when
/// a cluster's geometric multiplicity falls short or the global left/right
/// pairing cannot be normalized.
inline EigenSystem eig_full(const CMatrix& a, double cluster_tol_rel = 1e-8) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "eig_full needs square");
  const std::size_t n = a.rows();
  EigenSystem out;
  if (n == 0) {
    out.right_vectors = CMatrix(0, 0);
    out.left_vectors = CMatrix(0, 0);
    return out;
  }
  double anorm = a.frobenius_norm();
  if (anorm == 0.0) anorm = 1.0;
  const double tolc = cluster_tol_rel * anorm;

  CMatrix h = a;
  detail::hessenberg_in_place(h);
  CVector lam = detail::qr_eigenvalues(std::move(h));

  // Transitive clustering of eigenvalues within tolc (union-find).
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(lam[i] - lam[j]) <= tolc) parent[find(i)] = find(j);

  std::vector<std::vector<std::size_t>> groups;
  {
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = find(i);
      if (slot[r] < 0) {
        slot[r] = static_cast<std::ptrdiff_t>(groups.size());
        groups.emplace_back();
      }
      groups[static_cast<std::size_t>(slot[r])].push_back(i);
    }
  }

  const CMatrix aH = a.adjoint();
  CMatrix right(n, n), left(n, n);
  CVector values(n);
  std::vector<std::size_t> cluster_label(n);
  std::size_t col = 0;

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const std::size_t m = g.size();
    cplx mean = 0.0;
    for (const auto idx : g) mean += lam[idx];
    mean /= static_cast<double>(m);

    const CMatrix rsub = detail::cluster_subspace(a, mean, m, 0x9e3779b97f4a7c15ULL + gi);
    const CMatrix lsub = detail::cluster_subspace(aH, std::conj(mean), m, 0xc2b2ae3d27d4eb4fULL + gi);

    // Geometric multiplicity check: every subspace column must be an
    // eigenvector of the cluster mean within the cluster tolerance.
    for (std::size_t j = 0; j < m; ++j) {
      CVector v = rsub.column(j);
      CVector av = matvec(a, v);
      for (std::size_t i = 0; i < n; ++i) av[i] -= mean * v[i];
      if (norm2(av) > std::max(1e-6 * anorm, 50.0 * tolc))
        throw Error(ErrorCode::NonDiagonalizable,
                    "eigenvalue cluster has geometric multiplicity below algebraic");
    }

    // Left rows L = G^{-1} (lsub)†, G = (lsub)† rsub, so that L . rsub = I.
    CMatrix lrows = lsub.adjoint();
    CMatrix gram(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) gram(i, j) = dot_bilinear(lrows.row(i), rsub.column(j));
    LuFactors gf;
    try {
      gf = lu_factor(gram);
    } catch (const Error&) {
      throw Error(ErrorCode::NonDiagonalizable, "left/right cluster bases are not dual");
    }
    lrows = lu_solve(gf, lrows);

    // Rayleigh re-pairing inside the cluster.
    for (std::size_t j = 0; j < m; ++j) {
      const CVector rj = rsub.column(j);
      values[col + j] = dot_bilinear(lrows.row(j), matvec(a, rj));
      right.set_column(col + j, rj);
      left.set_row(col + j, lrows.row(j));
      cluster_label[col + j] = gi;
    }
    col += m;
  }

  // Deterministic output order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const cplx vi = values[i], vj = values[j];
    if (vi.real() != vj.real()) return vi.real() > vj.real();
    if (vi.imag() != vj.imag()) return vi.imag() > vj.imag();
    for (std::size_t r = 0; r < n; ++r) {
      const cplx ri = right(r, i), rj = right(r, j);
      if (ri.real() != rj.real()) return ri.real() < rj.real();
      if (ri.imag() != rj.imag()) return ri.imag() < rj.imag();
    }
    return false;
  });

  out.eigenvalues.resize(n);
  out.right_vectors = CMatrix(n, n);
  out.left_vectors = CMatrix(n, n);
  std::vector<std::size_t> label_sorted(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = values[order[j]];
    out.right_vectors.set_column(j, right.column(order[j]));
    out.left_vectors.set_row(j, left.row(order[j]));
    label_sorted[j] = cluster_label[order[j]];
  }
  {
    std::vector<std::ptrdiff_t> slot(groups.size(), -1);
    for (std::size_t j = 0; j < n; ++j) {
      if (slot[label_sorted[j]] < 0) {
        slot[label_sorted[j]] = static_cast<std::ptrdiff_t>(out.clusters.size());
        out.clusters.emplace_back();
      }
      out.clusters[static_cast<std::size_t>(slot[label_sorted[j]])].push_back(j);
    }
  }

  // Residuals and the global duality check.
  double res = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const CVector r = out.right_vectors.column(j);
    const CVector l = out.left_vectors.row(j);
    CVector ar = matvec(a, r);
    CVector la = matvec(a.transpose(), l);  // (l A)^T = A^T l^T
    for (std::size_t i = 0; i < n; ++i) {
      ar[i] -= out.eigenvalues[j] * r[i];
      la[i] -= out.eigenvalues[j] * l[i];
    }
    const double ln = norm2(l);
    res = std::max(res, norm2(ar));
    if (ln > 0) res = std::max(res, norm2(la) / ln);
  }
  out.residual_norm = res;

  double dual_defect = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx p = dot_bilinear(out.left_vectors.row(i), out.right_vectors.column(j));
      dual_defect = std::max(dual_defect, std::abs(p - (i == j ? cplx(1.0) : cplx(0.0))));
    }
  if (dual_defect > 1e-6)
    throw Error(ErrorCode::NonDiagonalizable, "left/right eigenbases are not biorthonormal");

  return out;
}

}  // namespace effham
