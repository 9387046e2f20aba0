#pragma once

#include <cmath>

#include "effham/complex_matrix.hpp"

namespace effham {

namespace detail {

/// Evaluates the [m/m] Pade approximant split into even/odd parts:
/// U = A * (odd part), V = even part, expm(A) ~ (V - U)^{-1} (V + U).
inline void pade_uv(const CMatrix& a, const double* c, int m, CMatrix& u, CMatrix& v) {
  const std::size_t n = a.rows();
  const CMatrix a2 = a * a;
  // Horner on powers of A^2.
  CMatrix even = CMatrix::identity(n) * cplx(c[m]);
  CMatrix odd = CMatrix::identity(n) * cplx(c[m - 1]);
  for (int k = m - 2; k >= 0; k -= 2) {
    even = a2 * even + CMatrix::identity(n) * cplx(c[k]);
    if (k >= 1) odd = a2 * odd + CMatrix::identity(n) * cplx(c[k - 1]);
  }
  // The loop above pairs coefficients (c[m], c[m-2], ...) into `even` only
  // when m is even; fix the roles by parity.
  if (m % 2 == 1) std::swap(even, odd);
  u = a * odd;
  v = even;
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants, order picked from the 1-norm (Higham 2005).
inline CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "expm needs square");
  const std::size_t n = a.rows();

  static const double pade3[] = {120., 60., 12., 1.};
  static const double pade5[] = {30240., 15120., 3360., 420., 30., 1.};
  static const double pade7[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const double pade9[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                 2162160.,     110880.,     3960.,       90.,        1.};
  static const double pade13[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                                  1187353796428800.,  129060195264000.,   10559470521600.,
                                  670442572800.,      33522128640.,       1323241920.,
                                  40840800.,          960960.,            16380.,
                                  182.,               1.};
  static const double theta3 = 1.495585217958292e-2;
  static const double theta5 = 2.539398330063230e-1;
  static const double theta7 = 9.504178996162932e-1;
  static const double theta9 = 2.097847961257068;
  static const double theta13 = 5.371920351148152;

  const double nrm = a.one_norm();
  CMatrix u, v;
  int squarings = 0;
  if (nrm <= theta9) {
    const double* c;
    int m;
    if (nrm <= theta3) {
      c = pade3;
      m = 3;
    } else if (nrm <= theta5) {
      c = pade5;
      m = 5;
    } else if (nrm <= theta7) {
      c = pade7;
      m = 7;
    } else {
      c = pade9;
      m = 9;
    }
    detail::pade_uv(a, c, m, u, v);
  } else {
    double scale = nrm / theta13;
    if (scale > 1.0) {
      squarings = static_cast<int>(std::ceil(std::log2(scale)));
    }
    CMatrix as = a;
    as *= cplx(std::ldexp(1.0, -squarings));
    detail::pade_uv(as, pade13, 13, u, v);
  }

  CMatrix num = v + u;
  CMatrix den = v - u;
  CMatrix r = solve(den, num);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

}  // namespace effham
