#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "effham/complex_matrix.hpp"
#include "effham/eigen_tracks.hpp"
#include "effham/error.hpp"
#include "effham/expm.hpp"

namespace effham {

/// Adiabaticity character at grid index t_index: the largest ratio
/// |<l_m | d/dt r_n>| / |lambda_m - lambda_n| over ordered track pairs that do
/// not share a degenerate cluster there. Small values certify that no
/// population leaks between tracks. Throws AllDegenerate when every pair sits
/// inside one cluster (no admissible denominator).
inline double adiabatic_gamma(const EigenTracks& tracks, std::size_t t_index) {
  if (t_index >= tracks.points())
    throw Error(ErrorCode::BadConfig, "time index out of range", "t_index");
  const std::size_t n = tracks.dim();

  std::vector<std::size_t> cluster_id(n);
  for (std::size_t g = 0; g < tracks.clusters[t_index].size(); ++g)
    for (std::size_t s : tracks.clusters[t_index][g]) cluster_id[s] = g;

  std::vector<CVector> deriv(n);
  for (std::size_t m = 0; m < n; ++m) deriv[m] = track_right_derivative(tracks, m, t_index);

  double best = -1.0;
  for (std::size_t m = 0; m < n; ++m) {
    CVector lm = tracks.left[t_index].row(m);
    for (std::size_t c = 0; c < n; ++c) {
      if (c == m || cluster_id[c] == cluster_id[m]) continue;
      const double gap = std::abs(tracks.values[t_index][m] - tracks.values[t_index][c]);
      best = std::max(best, std::abs(dot_bilinear(lm, deriv[c])) / gap);
    }
  }
  if (best < 0.0)
    throw Error(ErrorCode::AllDegenerate,
                "all tracks share one degenerate cluster; adiabaticity ratio undefined", "tracks");
  return best;
}

inline double adiabatic_gamma(const GeneratorTrajectory& gen, std::size_t t_index,
                              double cluster_tol_rel = 1e-8) {
  return adiabatic_gamma(track_eigensystem(gen, cluster_tol_rel), t_index);
}

/// State history produced by transition-free (adiabatic) coefficient
/// evolution. trace_drift is filled when the caller supplies the component
/// block shape; it reports the worst deviation of the total trace from its
/// initial value and is intentionally not renormalized away.
struct AdiabaticTrajectory {
  std::vector<double> times;
  std::vector<CVector> states;
  std::optional<double> trace_drift;
};

namespace detail {

/// Coarsest partition refined by both input partitions, as sorted slot groups
/// ordered by smallest member (deterministic).
inline std::vector<std::vector<std::size_t>> merge_partitions(
    const std::vector<std::vector<std::size_t>>& a,
    const std::vector<std::vector<std::size_t>>& b, std::size_t n) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::size_t x, std::size_t y) {
    x = find(x);
    y = find(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  };
  for (const auto& g : a)
    for (std::size_t i = 1; i < g.size(); ++i) unite(g[0], g[i]);
  for (const auto& g : b)
    for (std::size_t i = 1; i < g.size(); ++i) unite(g[0], g[i]);

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::ptrdiff_t> where(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t root = find(s);
    if (where[root] < 0) {
      where[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(where[root])].push_back(s);
  }
  return groups;
}

inline std::optional<double> block_trace_of(const CVector& v, std::size_t component_dim) {
  if (component_dim == 0) return std::nullopt;
  const std::size_t n2 = component_dim * component_dim;
  if (n2 == 0 || v.size() % n2 != 0) return std::nullopt;
  cplx tr{};
  for (std::size_t k = 0; k * n2 < v.size(); ++k)
    for (std::size_t m = 0; m < component_dim; ++m) tr += v[k * n2 + m * component_dim + m];
  return std::abs(tr);
}

}  // namespace detail

/// Evolves psi0 with all inter-track transitions suppressed: the state is
/// expanded in the right eigenvectors of the generator at t0 and each
/// coefficient picks up exp(integral of lambda_n) times the geometric factor
/// exp(-integral of <l_n | d/dt r_n>). Coefficients whose tracks share a
/// degenerate cluster evolve jointly under the cluster's reduced generator
/// (eigenvalue diagonal minus the connection block), integrated by a midpoint
/// exponential per grid step. The generator samples are the matrices G(t)
/// with d psi/dt = G psi, so eigenvalues are decay rates.
///
/// component_dim, when nonzero, declares that states are stacked vectorized
/// component matrices of that dimension; the total-trace drift diagnostic is
/// then reported through trace_drift.
inline AdiabaticTrajectory adiabatic_propagate(const EigenTracks& tracks, const CVector& psi0,
                                               std::size_t component_dim = 0) {
  const std::size_t n = tracks.dim();
  if (psi0.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "initial state length must match the generator",
                "psi0");

  std::vector<cplx> c(n);
  for (std::size_t m = 0; m < n; ++m) c[m] = dot_bilinear(tracks.left[0].row(m), psi0);

  AdiabaticTrajectory out;
  out.times = tracks.times;
  out.states.reserve(tracks.points());
  out.states.push_back(matvec(tracks.right[0], c));

  for (std::size_t i = 0; i + 1 < tracks.points(); ++i) {
    const double h = tracks.times[i + 1] - tracks.times[i];
    auto groups = detail::merge_partitions(tracks.clusters[i], tracks.clusters[i + 1], n);
    for (const auto& g : groups) {
      if (g.size() == 1) {
        const std::size_t m = g.front();
        const cplx lam = 0.5 * (tracks.values[i][m] + tracks.values[i + 1][m]);
        CVector lbar = tracks.left[i].row(m);
        CVector lnext = tracks.left[i + 1].row(m);
        CVector dr = tracks.right[i + 1].column(m);
        CVector rprev = tracks.right[i].column(m);
        cplx conn{};
        for (std::size_t p = 0; p < n; ++p)
          conn += 0.5 * (lbar[p] + lnext[p]) * (dr[p] - rprev[p]);
        c[m] *= std::exp(lam * h - conn);
        continue;
      }
      const std::size_t cs = g.size();
      CMatrix block(cs, cs);
      for (std::size_t a = 0; a < cs; ++a) {
        CVector la = tracks.left[i].row(g[a]);
        CVector lan = tracks.left[i + 1].row(g[a]);
        for (std::size_t b = 0; b < cs; ++b) {
          CVector rb = tracks.right[i].column(g[b]);
          CVector rbn = tracks.right[i + 1].column(g[b]);
          cplx conn{};
          for (std::size_t p = 0; p < n; ++p)
            conn += 0.5 * (la[p] + lan[p]) * (rbn[p] - rb[p]);
          block(a, b) = -conn;
        }
        block(a, a) += 0.5 * (tracks.values[i][g[a]] + tracks.values[i + 1][g[a]]) * h;
      }
      CMatrix w = expm(block);
      std::vector<cplx> cg(cs);
      for (std::size_t a = 0; a < cs; ++a) cg[a] = c[g[a]];
      for (std::size_t a = 0; a < cs; ++a) {
        cplx acc{};
        for (std::size_t b = 0; b < cs; ++b) acc += w(a, b) * cg[b];
        c[g[a]] = acc;
      }
    }
    out.states.push_back(matvec(tracks.right[i + 1], c));
  }

  if (auto t0 = detail::block_trace_of(out.states.front(), component_dim)) {
    double drift = 0.0;
    for (const auto& s : out.states)
      drift = std::max(drift, std::abs(*detail::block_trace_of(s, component_dim) - *t0));
    out.trace_drift = drift;
  }
  return out;
}

inline AdiabaticTrajectory adiabatic_propagate(const GeneratorTrajectory& gen, const CVector& psi0,
                                               std::size_t component_dim = 0,
                                               double cluster_tol_rel = 1e-8) {
  return adiabatic_propagate(track_eigensystem(gen, cluster_tol_rel), psi0, component_dim);
}

}  // namespace effham
