#pragma once

#include <algorithm>
#include <cmath>

#include "effham/generalized.hpp"

namespace effham::two_band {

/// Two bands of a qubit exchanging population: band 0 loses its excited level
/// into band 1 at rate gamma2 (lowering on the way out) and gains from band
/// 1's ground level at rate gamma1 (raising on the way in). Everything below
/// uses the basis order (excited, ground), so raising = |e><g|.
inline CMatrix raising() {
  CMatrix r(2, 2);
  r(0, 1) = 1.0;
  return r;
}

inline CMatrix lowering() {
  CMatrix l(2, 2);
  l(1, 0) = 1.0;
  return l;
}

inline CMatrix excited_projector() {
  CMatrix p(2, 2);
  p(0, 0) = 1.0;
  return p;
}

inline CMatrix ground_projector() {
  CMatrix p(2, 2);
  p(1, 1) = 1.0;
  return p;
}

inline GeneralizedLindbladModel model(double gamma1, double gamma2) {
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0))
    throw Error(ErrorCode::BadConfig, "rates must be nonnegative", "gamma");
  GeneralizedLindbladModel m;
  m.dim = 2;
  m.components = 2;
  m.hamiltonians.assign(2, CMatrix(2, 2));
  m.transitions.push_back({0, 1, 0, std::sqrt(gamma1) * raising()});
  m.transitions.push_back({1, 0, 0, std::sqrt(gamma2) * lowering()});
  return m;
}

/// Exact solution of the coupled equations for arbitrary rates, initial
/// tuple, and time; derived by integrating each matrix element directly.
inline BlockOperator closed_form(const BlockOperator& rho0, double gamma1, double gamma2,
                                 double t) {
  if (rho0.size() != 2 || rho0[0].rows() != 2 || rho0[1].rows() != 2)
    throw Error(ErrorCode::DimensionMismatch, "expected a two-band qubit tuple");
  const double s = gamma1 + gamma2;
  const double est = std::exp(-s * t);
  const double mix = s > 0.0 ? (1.0 - est) / s : t;  // -> t as both rates vanish

  BlockOperator rho(2, CMatrix(2, 2));
  const cplx p0 = rho0[0](0, 0);  // upper band, excited level
  const cplx q0 = rho0[1](1, 1);  // lower band, ground level

  rho[0](0, 0) = (s > 0.0 ? (gamma1 + gamma2 * est) * p0 / s : p0) + gamma1 * mix * q0;
  rho[0](0, 1) = std::exp(-gamma2 * t / 2.0) * rho0[0](0, 1);
  rho[0](1, 0) = std::exp(-gamma2 * t / 2.0) * rho0[0](1, 0);
  rho[0](1, 1) = rho0[0](1, 1);

  rho[1](0, 0) = rho0[1](0, 0);
  rho[1](0, 1) = std::exp(-gamma1 * t / 2.0) * rho0[1](0, 1);
  rho[1](1, 0) = std::exp(-gamma1 * t / 2.0) * rho0[1](1, 0);
  rho[1](1, 1) = gamma2 * mix * p0 + (s > 0.0 ? (gamma2 + gamma1 * est) * q0 / s : q0);
  return rho;
}

/// Initial tuple with all weight in the upper band, excited population p.
inline BlockOperator initial_upper(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorCode::BadConfig, "population must lie in [0,1]", "initial-upper");
  BlockOperator rho(2, CMatrix(2, 2));
  rho[0](0, 0) = p;
  rho[0](1, 1) = 1.0 - p;
  return rho;
}

/// Full analytic damping basis: eight eigen-tuples with their duals and
/// decay rates, ordered zero modes first, then the coherence quartet, then
/// the population relaxation mode.
struct AnalyticBasis {
  CVector eigenvalues;
  std::vector<BlockOperator> right;
  std::vector<BlockOperator> left;
};

inline AnalyticBasis analytic_damping_basis(double gamma1, double gamma2) {
  const double s = gamma1 + gamma2;
  if (!(s > 0.0)) throw Error(ErrorCode::BadConfig, "rates must not both vanish", "gamma");
  const CMatrix zero(2, 2);
  const CMatrix pe = excited_projector(), pg = ground_projector();
  const CMatrix up = raising(), dn = lowering();

  AnalyticBasis b;
  auto push = [&](cplx lambda, BlockOperator a, BlockOperator d) {
    b.eigenvalues.push_back(lambda);
    b.right.push_back(std::move(a));
    b.left.push_back(std::move(d));
  };
  push(0.0, {zero, pe}, {zero, pe});
  push(0.0, {pg, zero}, {pg, zero});
  push(0.0, {(gamma1 / s) * pe, (gamma2 / s) * pg}, {pe, pg});
  push(-gamma1 / 2.0, {zero, dn}, {zero, up});
  push(-gamma1 / 2.0, {zero, up}, {zero, dn});
  push(-gamma2 / 2.0, {dn, zero}, {up, zero});
  push(-gamma2 / 2.0, {up, zero}, {dn, zero});
  push(-s, {pe, cplx(-1.0) * pg}, {(gamma2 / s) * pe, cplx(-gamma1 / s) * pg});
  return b;
}

/// Linear ramp of a rate, specified by its endpoint value and slope and
/// clipped from below so the generator never becomes dissipation-free.
struct Ramp {
  double value_at_end = 1.0;
  double slope_at_end = 0.0;
  double floor = 1e-3;

  double operator()(double t, double t_end) const {
    return std::max(floor, value_at_end + slope_at_end * (t - t_end));
  }
};

}  // namespace effham::two_band
