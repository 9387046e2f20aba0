#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "effham/complex_matrix.hpp"
#include "effham/eig.hpp"
#include "effham/error.hpp"
#include "effham/hermitian_eig.hpp"

namespace effham {

/// A matrix-valued function of time, sampled on a strictly increasing grid.
/// Used both for generators driving an evolution and for families whose
/// spectral decomposition is followed point by point.
struct GeneratorTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> matrices;
};

inline void validate_generator(const GeneratorTrajectory& gen) {
  if (gen.times.size() < 2)
    throw Error(ErrorCode::BadConfig, "trajectory needs at least two grid points", "times");
  if (gen.matrices.size() != gen.times.size())
    throw Error(ErrorCode::DimensionMismatch, "expected one matrix per grid time", "matrices");
  const std::size_t n = gen.matrices.front().rows();
  if (n == 0 || gen.matrices.front().cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "trajectory matrices must be square", "matrices");
  for (const auto& m : gen.matrices)
    if (m.rows() != n || m.cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "matrix dimensions change along the grid",
                  "matrices");
  for (std::size_t i = 0; i + 1 < gen.times.size(); ++i)
    if (!(gen.times[i + 1] > gen.times[i]))
      throw Error(ErrorCode::BadConfig, "grid times must increase strictly", "times");
}

/// Spectral decompositions of a matrix family stitched into continuous tracks.
///
/// Slot j of every per-time decomposition refers to the same physical branch:
/// values[i][j] follows one eigenvalue curve, right[i] column j / left[i] row j
/// follow its eigenvector pair. Bilinear duality l_m . r_n = delta_mn holds at
/// every time. Gauge convention: eigenvectors keep the eigensolver's canonical
/// phase; continuity is enforced by a sign flip whenever the successive overlap
/// acquires a negative real part, so <l_j(t_i)|r_j(t_i+1)> always has positive
/// real part. Members of a degenerate cluster are instead aligned with the
/// previous frame through the unitary polar factor of the overlap block, which
/// preserves duality while removing arbitrary intra-cluster rotations.
struct EigenTracks {
  std::vector<double> times;
  std::vector<CVector> values;  ///< values[i][j]: eigenvalue of track j at times[i]
  std::vector<CMatrix> right;   ///< right[i] column j: right vector of track j
  std::vector<CMatrix> left;    ///< left[i] row j: dual left vector of track j
  std::vector<std::vector<std::vector<std::size_t>>> clusters;  ///< per time, groups of slots
  double min_alignment = 1.0;   ///< smallest successive-overlap magnitude seen

  std::size_t points() const { return times.size(); }
  std::size_t dim() const { return right.empty() ? 0 : right.front().rows(); }

  /// True when slot j belongs to a multi-member cluster at any grid time.
  bool track_clustered(std::size_t j) const {
    for (const auto& groups : clusters)
      for (const auto& g : groups)
        if (g.size() > 1)
          for (std::size_t s : g)
            if (s == j) return true;
    return false;
  }

  /// Slots of the cluster containing j at grid index i ({j} when nondegenerate).
  std::vector<std::size_t> cluster_of(std::size_t i, std::size_t j) const {
    for (const auto& g : clusters[i])
      for (std::size_t s : g)
        if (s == j) return g;
    return {j};
  }
};

namespace detail {

/// Unitary polar factor of a square matrix: U = M (M^dag M)^{-1/2}.
/// Returns the smallest singular value of M through *smin.
inline CMatrix unitary_polar_factor(const CMatrix& m, double* smin) {
  const std::size_t c = m.rows();
  CMatrix gram = m.adjoint() * m;
  HermitianEig he = hermitian_eig(gram);
  double lo = he.values.front();
  if (smin) *smin = std::sqrt(std::max(lo, 0.0));
  double scale = std::max(he.values.back(), 1e-300);
  CMatrix inv_sqrt(c, c);
  for (std::size_t a = 0; a < c; ++a) {
    double ev = std::max(he.values[a], 1e-24 * scale);
    cplx w = cplx(1.0 / std::sqrt(ev), 0.0);
    for (std::size_t p = 0; p < c; ++p)
      for (std::size_t q = 0; q < c; ++q)
        inv_sqrt(p, q) += he.vectors(p, a) * w * std::conj(he.vectors(q, a));
  }
  return m * inv_sqrt;
}

}  // namespace detail

/// Diagonalizes a matrix family at every grid point and stitches the
/// decompositions into continuous tracks. Assignment between consecutive
/// times is greedy on the largest bilinear overlap |l_prev . r_curr| with a
/// deterministic tie break; gauge handling is described on EigenTracks.
/// Eigenvalues closer than cluster_tol_rel * ||matrix||_F are treated as one
/// degenerate cluster. Throws NonDiagonalizable if any grid point defeats the
/// dense eigensolver's duality tolerances.
inline EigenTracks track_eigensystem(const GeneratorTrajectory& gen,
                                     double cluster_tol_rel = 1e-8) {
  validate_generator(gen);
  const std::size_t n = gen.matrices.front().rows();
  const std::size_t steps = gen.times.size();

  EigenTracks out;
  out.times = gen.times;
  out.values.reserve(steps);
  out.right.reserve(steps);
  out.left.reserve(steps);
  out.clusters.reserve(steps);

  for (std::size_t i = 0; i < steps; ++i) {
    EigenSystem es = eig_full(gen.matrices[i], cluster_tol_rel);
    if (i == 0) {
      out.values.push_back(es.eigenvalues);
      out.right.push_back(es.right_vectors);
      out.left.push_back(es.left_vectors);
      out.clusters.push_back(es.clusters);
      continue;
    }

    const CMatrix& lprev = out.left.back();

    // Overlap scores between previous slots (rows) and fresh vectors (cols).
    std::vector<double> score(n * n);
    for (std::size_t m = 0; m < n; ++m) {
      CVector lm = lprev.row(m);
      for (std::size_t c = 0; c < n; ++c)
        score[m * n + c] = std::abs(dot_bilinear(lm, es.right_vectors.column(c)));
    }

    // Greedy assignment: repeatedly take the largest unassigned score,
    // breaking ties toward the smallest slot then the smallest column.
    std::vector<std::size_t> col_of_slot(n, n);
    std::vector<bool> slot_used(n, false), col_used(n, false);
    for (std::size_t pick = 0; pick < n; ++pick) {
      double best = -1.0;
      std::size_t bm = 0, bc = 0;
      for (std::size_t m = 0; m < n; ++m) {
        if (slot_used[m]) continue;
        for (std::size_t c = 0; c < n; ++c) {
          if (col_used[c]) continue;
          if (score[m * n + c] > best) {
            best = score[m * n + c];
            bm = m;
            bc = c;
          }
        }
      }
      col_of_slot[bm] = bc;
      slot_used[bm] = true;
      col_used[bc] = true;
    }

    // Permute the fresh decomposition into slot order.
    CVector vals(n);
    CMatrix right(n, n), left(n, n);
    for (std::size_t m = 0; m < n; ++m) {
      vals[m] = es.eigenvalues[col_of_slot[m]];
      right.set_column(m, es.right_vectors.column(col_of_slot[m]));
      left.set_row(m, es.left_vectors.row(col_of_slot[m]));
    }
    std::vector<std::size_t> slot_of_col(n);
    for (std::size_t m = 0; m < n; ++m) slot_of_col[col_of_slot[m]] = m;
    std::vector<std::vector<std::size_t>> groups;
    groups.reserve(es.clusters.size());
    for (const auto& g : es.clusters) {
      std::vector<std::size_t> mapped;
      mapped.reserve(g.size());
      for (std::size_t c : g) mapped.push_back(slot_of_col[c]);
      std::sort(mapped.begin(), mapped.end());
      groups.push_back(std::move(mapped));
    }

    // Gauge continuity per cluster.
    for (const auto& g : groups) {
      if (g.size() == 1) {
        const std::size_t s = g.front();
        cplx ov = dot_bilinear(lprev.row(s), right.column(s));
        out.min_alignment = std::min(out.min_alignment, std::abs(ov));
        if (ov.real() < 0.0) {
          CVector rc = right.column(s), lr = left.row(s);
          for (auto& x : rc) x = -x;
          for (auto& x : lr) x = -x;
          right.set_column(s, rc);
          left.set_row(s, lr);
        }
        continue;
      }
      const std::size_t c = g.size();
      CMatrix overlap(c, c);
      for (std::size_t a = 0; a < c; ++a) {
        CVector la = lprev.row(g[a]);
        for (std::size_t b = 0; b < c; ++b)
          overlap(a, b) = dot_bilinear(la, right.column(g[b]));
      }
      double smin = 0.0;
      CMatrix u = detail::unitary_polar_factor(overlap, &smin);
      out.min_alignment = std::min(out.min_alignment, smin);
      // right block <- right block * U^dag, left block <- U * left block:
      // preserves l_m . r_n = delta and replaces the arbitrary intra-cluster
      // rotation with the one closest to the previous frame.
      CMatrix udag = u.adjoint();
      std::vector<CVector> new_cols(c, CVector(n)), new_rows(c, CVector(n));
      for (std::size_t b = 0; b < c; ++b) {
        for (std::size_t a = 0; a < c; ++a) {
          CVector col = right.column(g[a]);
          CVector row = left.row(g[a]);
          const cplx wr = udag(a, b);
          const cplx wl = u(b, a);
          for (std::size_t p = 0; p < n; ++p) {
            new_cols[b][p] += col[p] * wr;
            new_rows[b][p] += wl * row[p];
          }
        }
      }
      for (std::size_t b = 0; b < c; ++b) {
        right.set_column(g[b], new_cols[b]);
        left.set_row(g[b], new_rows[b]);
      }
    }

    out.values.push_back(std::move(vals));
    out.right.push_back(std::move(right));
    out.left.push_back(std::move(left));
    out.clusters.push_back(std::move(groups));
  }
  return out;
}

namespace detail {

/// Weights of the three-point finite-difference derivative at one of the
/// stencil's own nodes (which = 0, 1, 2), for generally non-uniform spacing.
struct Stencil3 {
  double w0, w1, w2;
};

inline Stencil3 derivative_stencil(double t0, double t1, double t2, int which) {
  const double h0 = t1 - t0, h1 = t2 - t1;
  switch (which) {
    case 0:
      return {-(2.0 * h0 + h1) / (h0 * (h0 + h1)), (h0 + h1) / (h0 * h1),
              -h0 / (h1 * (h0 + h1))};
    case 1:
      return {-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1))};
    default:
      return {h1 / (h0 * (h0 + h1)), -(h0 + h1) / (h0 * h1),
              (h0 + 2.0 * h1) / (h1 * (h0 + h1))};
  }
}

}  // namespace detail

/// d/dt of track j's right eigenvector at grid index i: three-point central
/// difference in the interior, one-sided three-point stencils at the ends
/// (plain two-point slope when the grid has only two points).
inline CVector track_right_derivative(const EigenTracks& t, std::size_t j, std::size_t i) {
  const std::size_t np = t.points();
  const std::size_t n = t.dim();
  CVector d(n);
  if (np == 2) {
    CVector a = t.right[0].column(j), b = t.right[1].column(j);
    const double h = t.times[1] - t.times[0];
    for (std::size_t p = 0; p < n; ++p) d[p] = (b[p] - a[p]) / h;
    return d;
  }
  std::size_t base = (i == 0) ? 0 : (i == np - 1 ? np - 3 : i - 1);
  int which = static_cast<int>(i - base);
  detail::Stencil3 s =
      detail::derivative_stencil(t.times[base], t.times[base + 1], t.times[base + 2], which);
  CVector v0 = t.right[base].column(j), v1 = t.right[base + 1].column(j),
          v2 = t.right[base + 2].column(j);
  for (std::size_t p = 0; p < n; ++p) d[p] = s.w0 * v0[p] + s.w1 * v1[p] + s.w2 * v2[p];
  return d;
}

}  // namespace effham
