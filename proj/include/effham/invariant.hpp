#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "effham/complex_matrix.hpp"
#include "effham/eigen_tracks.hpp"
#include "effham/error.hpp"

namespace effham {

/// Uniformly sampled matrix trajectory built from a callable t -> CMatrix.
template <typename Fn>
GeneratorTrajectory sample_generator(double t0, double t1, std::size_t points, Fn&& fn) {
  if (points < 2) throw Error(ErrorCode::BadConfig, "need at least two sample points", "points");
  if (!(t1 > t0)) throw Error(ErrorCode::BadConfig, "sampling interval must be increasing", "times");
  GeneratorTrajectory gen;
  gen.times.resize(points);
  gen.matrices.reserve(points);
  const double h = (t1 - t0) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    gen.times[i] = (i + 1 == points) ? t1 : t0 + h * static_cast<double>(i);
    gen.matrices.push_back(fn(gen.times[i]));
  }
  return gen;
}

/// A dynamical invariant integrated along a generator trajectory, together
/// with its stitched eigen-tracks. The defining equation is
/// d(inv)/dt = -i [generator(t), inv], so the invariant's eigenvalues stay
/// constant while its eigenvectors follow the dynamics.
struct InvariantTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> generators;  ///< generator samples, kept for phase quadratures
  std::vector<CMatrix> invariants;  ///< integrated invariant at each grid time
  EigenTracks tracks;               ///< eigen-decomposition of the invariants
  double defect = 0.0;  ///< max interior residual of i d(inv)/dt - [generator, inv]
};

namespace detail {

inline CMatrix commutator_flow(const CMatrix& h, const CMatrix& m) {
  CMatrix hm = h * m;
  CMatrix mh = m * h;
  const std::size_t n = m.rows();
  CMatrix out(n, n);
  const cplx mi(0.0, -1.0);
  for (std::size_t i = 0; i < n * n; ++i) out.data()[i] = mi * (hm.data()[i] - mh.data()[i]);
  return out;
}

inline CMatrix lerp_matrix(const CMatrix& a, const CMatrix& b, double w) {
  const std::size_t n = a.rows();
  CMatrix out(n, n);
  for (std::size_t i = 0; i < n * n; ++i)
    out.data()[i] = a.data()[i] * (1.0 - w) + b.data()[i] * w;
  return out;
}

}  // namespace detail

/// Integrates the invariant equation d(inv)/dt = -i [generator(t), inv] with
/// classic fourth-order Runge-Kutta. The generator is interpolated linearly
/// between grid samples, and each grid interval is split internally so that
/// ||generator||_F * substep stays at or below substep_target. Requires
/// ||generator||_F * grid_step <= 0.1 (StepTooCoarse otherwise); failure to
/// diagonalize the invariant at any grid point raises NonDiagonalizable.
inline InvariantTrajectory propagate_invariant(const GeneratorTrajectory& gen, const CMatrix& i0,
                                               double substep_target = 0.05,
                                               double cluster_tol_rel = 1e-8) {
  validate_generator(gen);
  const std::size_t n = gen.matrices.front().rows();
  if (i0.rows() != n || i0.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "initial invariant must match generator dimension",
                "i0");
  if (!(substep_target > 0))
    throw Error(ErrorCode::BadConfig, "substep target must be positive", "substep_target");

  std::vector<double> norms(gen.matrices.size());
  for (std::size_t i = 0; i < gen.matrices.size(); ++i) norms[i] = gen.matrices[i].frobenius_norm();
  for (std::size_t i = 0; i + 1 < gen.times.size(); ++i) {
    const double h = gen.times[i + 1] - gen.times[i];
    if (std::max(norms[i], norms[i + 1]) * h > 0.1 * (1.0 + 1e-9))
      throw Error(ErrorCode::StepTooCoarse,
                  "grid step exceeds 0.1 / ||generator||; refine the time grid", "times");
  }

  InvariantTrajectory out;
  out.times = gen.times;
  out.generators = gen.matrices;
  out.invariants.reserve(gen.times.size());
  out.invariants.push_back(i0);

  CMatrix cur = i0;
  for (std::size_t i = 0; i + 1 < gen.times.size(); ++i) {
    const double h = gen.times[i + 1] - gen.times[i];
    const double local = std::max(norms[i], norms[i + 1]);
    const std::size_t nsub =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(local * h / substep_target)));
    const double hs = h / static_cast<double>(nsub);
    for (std::size_t s = 0; s < nsub; ++s) {
      const double w0 = static_cast<double>(s) / static_cast<double>(nsub);
      const double wm = (static_cast<double>(s) + 0.5) / static_cast<double>(nsub);
      const double w1 = static_cast<double>(s + 1) / static_cast<double>(nsub);
      CMatrix h0 = detail::lerp_matrix(gen.matrices[i], gen.matrices[i + 1], w0);
      CMatrix hm = detail::lerp_matrix(gen.matrices[i], gen.matrices[i + 1], wm);
      CMatrix h1 = detail::lerp_matrix(gen.matrices[i], gen.matrices[i + 1], w1);

      CMatrix k1 = detail::commutator_flow(h0, cur);
      CMatrix m2 = cur;
      for (std::size_t p = 0; p < n * n; ++p) m2.data()[p] += 0.5 * hs * k1.data()[p];
      CMatrix k2 = detail::commutator_flow(hm, m2);
      CMatrix m3 = cur;
      for (std::size_t p = 0; p < n * n; ++p) m3.data()[p] += 0.5 * hs * k2.data()[p];
      CMatrix k3 = detail::commutator_flow(hm, m3);
      CMatrix m4 = cur;
      for (std::size_t p = 0; p < n * n; ++p) m4.data()[p] += hs * k3.data()[p];
      CMatrix k4 = detail::commutator_flow(h1, m4);
      for (std::size_t p = 0; p < n * n; ++p)
        cur.data()[p] += (hs / 6.0) * (k1.data()[p] + 2.0 * k2.data()[p] + 2.0 * k3.data()[p] +
                                       k4.data()[p]);
    }
    out.invariants.push_back(cur);
  }

  // Residual of the invariant equation at interior grid points, using the
  // same three-point differences the phase quadratures rely on.
  const cplx im(0.0, 1.0);
  for (std::size_t i = 1; i + 1 < out.times.size(); ++i) {
    detail::Stencil3 st =
        detail::derivative_stencil(out.times[i - 1], out.times[i], out.times[i + 1], 1);
    CMatrix comm = out.generators[i] * out.invariants[i] - out.invariants[i] * out.generators[i];
    double acc = 0.0;
    for (std::size_t p = 0; p < n * n; ++p) {
      cplx d = st.w0 * out.invariants[i - 1].data()[p] + st.w1 * out.invariants[i].data()[p] +
               st.w2 * out.invariants[i + 1].data()[p];
      cplx r = im * d - comm.data()[p];
      acc += std::norm(r);
    }
    out.defect = std::max(out.defect, std::sqrt(acc));
  }

  GeneratorTrajectory inv_family;
  inv_family.times = out.times;
  inv_family.matrices = out.invariants;
  out.tracks = track_eigensystem(inv_family, cluster_tol_rel);
  return out;
}

/// Convenience initialization with the generator's own initial sample as the
/// invariant seed (exact when the generator is constant; an adiabatic
/// approximation otherwise).
inline InvariantTrajectory propagate_invariant_default(const GeneratorTrajectory& gen,
                                                       double substep_target = 0.05,
                                                       double cluster_tol_rel = 1e-8) {
  validate_generator(gen);
  return propagate_invariant(gen, gen.matrices.front(), substep_target, cluster_tol_rel);
}

/// Phases accumulated by one eigen-track coefficient: the coefficient ratio
/// factorizes as c_j(T)/c_j(0) = exp(dynamical) * exp(i * geometric), with an
/// extra exp(i * noncyclic_correction) closure factor when the trajectory does
/// not return to its initial configuration.
struct PhaseResult {
  std::size_t track = 0;
  cplx geometric{};   ///< i * integral of <l_j | d/dt r_j>; real for unitary families
  cplx dynamical{};   ///< -i * integral of <l_j | generator | r_j>
  double noncyclic_correction = 0.0;  ///< arg <l_j(0) | r_j(T)>, 0 for the cyclic variant
};

namespace detail {

/// Shared trapezoid quadrature of the connection and generator expectation
/// along track j of a stitched eigen-track family.
inline PhaseResult phase_quadrature(const EigenTracks& tracks,
                                    const std::vector<CMatrix>& generators, std::size_t j) {
  const std::size_t np = tracks.points();
  std::vector<cplx> geo(np), dyn(np);
  for (std::size_t i = 0; i < np; ++i) {
    CVector l = tracks.left[i].row(j);
    CVector dr = track_right_derivative(tracks, j, i);
    geo[i] = cplx(0.0, 1.0) * dot_bilinear(l, dr);
    CVector hr = matvec(generators[i], tracks.right[i].column(j));
    dyn[i] = cplx(0.0, -1.0) * dot_bilinear(l, hr);
  }
  PhaseResult res;
  res.track = j;
  for (std::size_t i = 0; i + 1 < np; ++i) {
    const double w = 0.5 * (tracks.times[i + 1] - tracks.times[i]);
    res.geometric += w * (geo[i] + geo[i + 1]);
    res.dynamical += w * (dyn[i] + dyn[i + 1]);
  }
  return res;
}

inline void require_nondegenerate_track(const EigenTracks& tracks, std::size_t j) {
  if (j >= tracks.dim())
    throw Error(ErrorCode::BadConfig, "track index out of range", "track");
  if (tracks.track_clustered(j))
    throw Error(ErrorCode::DegenerateTrack,
                "track shares a degenerate cluster; its individual phase is not defined",
                "track");
}

}  // namespace detail

/// Geometric and dynamical phase of track j for a trajectory that closes on
/// itself. Requires the track to stay nondegenerate on the whole grid.
inline PhaseResult geometric_phase_cyclic(const InvariantTrajectory& traj, std::size_t j) {
  detail::require_nondegenerate_track(traj.tracks, j);
  return detail::phase_quadrature(traj.tracks, traj.generators, j);
}

/// Open-path variant: adds the closure phase arg<l_j(0)|r_j(T)> in
/// noncyclic_correction. The total geometric phase is
/// geometric + noncyclic_correction. Throws ZeroOverlap when the endpoint
/// overlap is too small to define the closure argument.
inline PhaseResult geometric_phase_noncyclic(const InvariantTrajectory& traj, std::size_t j) {
  detail::require_nondegenerate_track(traj.tracks, j);
  PhaseResult res = detail::phase_quadrature(traj.tracks, traj.generators, j);
  cplx ov = dot_bilinear(traj.tracks.left.front().row(j), traj.tracks.right.back().column(j));
  if (std::abs(ov) < 1e-12)
    throw Error(ErrorCode::ZeroOverlap, "endpoint eigenvectors are orthogonal; closure phase undefined",
                "track");
  res.noncyclic_correction = std::atan2(ov.imag(), ov.real());
  return res;
}

/// Adiabatic variant: the same quadrature applied to the instantaneous
/// eigen-tracks of the generator itself (no invariant integration). Tracks
/// inside a degenerate cluster are admitted here — they are aligned as a block
/// frame — because physically relevant generators (e.g. Liouvillians with
/// conserved quantities) routinely carry degenerate eigenvalue clusters.
inline PhaseResult geometric_phase_adiabatic(const GeneratorTrajectory& gen, std::size_t j,
                                             double cluster_tol_rel = 1e-8) {
  EigenTracks tracks = track_eigensystem(gen, cluster_tol_rel);
  if (j >= tracks.dim())
    throw Error(ErrorCode::BadConfig, "track index out of range", "track");
  PhaseResult res = detail::phase_quadrature(tracks, gen.matrices, j);
  cplx ov = dot_bilinear(tracks.left.front().row(j), tracks.right.back().column(j));
  if (std::abs(ov) < 1e-12)
    throw Error(ErrorCode::ZeroOverlap, "endpoint eigenvectors are orthogonal; closure phase undefined",
                "track");
  res.noncyclic_correction = std::atan2(ov.imag(), ov.real());
  return res;
}

}  // namespace effham
