#pragma once

#include <cmath>

#include "effham/complex_matrix.hpp"
#include "effham/hermitian_eig.hpp"

namespace effham {

namespace detail {

inline void require_state(const CMatrix& rho, const char* which) {
  if (rho.rows() != rho.cols()) throw Error(ErrorCode::NotAState, "state must be square", which);
  if (rho.hermiticity_defect() > 1e-8)
    throw Error(ErrorCode::NotAState, "state is not Hermitian", which);
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-8)
    throw Error(ErrorCode::NotAState, "state trace differs from one", which);
  const HermitianEig e = hermitian_eig(rho);
  if (!e.values.empty() && e.values.front() < -1e-10)
    throw Error(ErrorCode::NotAState, "state has a negative eigenvalue", which);
}

}  // namespace detail

/// Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)) for density
/// matrices. Eigenvalues in [-1e-10, 0) are clamped to zero; anything more
/// negative fails the state precondition.
inline double fidelity(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw Error(ErrorCode::DimensionMismatch, "fidelity states differ in dimension");
  detail::require_state(rho, "rho");
  detail::require_state(sigma, "sigma");

  const CMatrix sr = psd_sqrt(rho);
  const CMatrix m = (sr * sigma * sr).hermitized();
  const HermitianEig e = hermitian_eig(m);
  double f = 0.0;
  for (const double lam : e.values)
    if (lam > 0) f += std::sqrt(lam);
  return f;
}

}  // namespace effham
