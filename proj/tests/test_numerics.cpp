#include <catch2/catch_amalgamated.hpp>

#include "effham/complex_matrix.hpp"
#include "effham/expm.hpp"
#include "effham/fidelity.hpp"
#include "effham/hermitian_eig.hpp"
#include "effham/nullspace.hpp"
#include "oracles.hpp"

using namespace effham;

namespace {
const cplx I1(0.0, 1.0);

CMatrix sigma_plus() {
  CMatrix m(2, 2);
  m(0, 1) = 1.0;
  return m;
}

CMatrix sigma_x() {
  CMatrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}
}  // namespace

TEST_CASE("kron basis placement and shapes") {
  const CMatrix k = kron(sigma_plus(), sigma_plus());
  REQUIRE(k.rows() == 4);
  REQUIRE(k.cols() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const cplx want = (i == 0 && j == 3) ? cplx(1.0) : cplx(0.0);
      REQUIRE(std::abs(k(i, j) - want) == 0.0);
    }

  oracles::Rng rng(11);
  const CMatrix a = oracles::random_matrix(rng, 3);
  const CMatrix b = oracles::random_matrix(rng, 2);
  // Mixed-product rule against direct evaluation.
  const CMatrix lhs = kron(a, b) * kron(a, b);
  const CMatrix rhs = kron(a * a, b * b);
  REQUIRE((lhs - rhs).max_abs() < 1e-12);
}

TEST_CASE("LU solves and inverts") {
  oracles::Rng rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep);
    const CMatrix a = oracles::random_matrix(rng, n);
    const CMatrix id = a * inverse(a);
    REQUIRE((id - CMatrix::identity(n)).max_abs() < 1e-10);
  }
}

TEST_CASE("expm identities") {
  const CMatrix z(3, 3);
  REQUIRE((expm(z) - CMatrix::identity(3)).max_abs() == 0.0);

  // Nilpotent: exp(N) = I + N + N^2/2 terminates.
  CMatrix nilp(3, 3);
  nilp(0, 1) = 2.0;
  nilp(1, 2) = -1.5 * I1;
  CMatrix series = CMatrix::identity(3) + nilp + 0.5 * (nilp * nilp);
  REQUIRE((expm(nilp) - series).max_abs() < 1e-14);

  // Rotation closed form: exp(i theta sx) = cos(theta) I + i sin(theta) sx.
  for (const double theta : {0.3, 2.0, 17.0, 50.0}) {
    const CMatrix a = (I1 * cplx(theta)) * sigma_x();
    const CMatrix want =
        cplx(std::cos(theta)) * CMatrix::identity(2) + (I1 * cplx(std::sin(theta))) * sigma_x();
    REQUIRE((expm(a) - want).max_abs() < 1e-12 * std::max(1.0, theta));
  }
}

TEST_CASE("expm inverse pairing on random matrices") {
  oracles::Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 4);
    CMatrix a = oracles::random_matrix(rng, n);
    a *= cplx(5.0 / std::max(1.0, a.one_norm()));
    const CMatrix prod = expm(a) * expm(cplx(-1.0) * a);
    REQUIRE((prod - CMatrix::identity(n)).max_abs() < 1e-10);
  }
}

TEST_CASE("hermitian eigensolver reconstructs and orders") {
  oracles::Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 5);
    const CMatrix a = oracles::random_hermitian(rng, n, 2.0);
    const HermitianEig e = hermitian_eig(a);
    for (std::size_t k = 0; k + 1 < n; ++k) REQUIRE(e.values[k] <= e.values[k + 1]);
    CMatrix recon(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const CVector u = e.vectors.column(k);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) recon(i, j) += e.values[k] * u[i] * std::conj(u[j]);
    }
    REQUIRE((recon - a).max_abs() < 1e-11 * std::max(1.0, a.frobenius_norm()));
    const CMatrix vhv = e.vectors.adjoint() * e.vectors;
    REQUIRE((vhv - CMatrix::identity(n)).max_abs() < 1e-12);
  }
}

TEST_CASE("null_space finds kernels of known rank") {
  CMatrix d(2, 2);
  d(1, 1) = 1.0;
  const CMatrix ns = null_space(d, 1e-10);
  REQUIRE(ns.cols() == 1);
  REQUIRE(std::abs(std::abs(ns(0, 0)) - 1.0) < 1e-12);
  REQUIRE(std::abs(ns(1, 0)) < 1e-12);

  oracles::Rng rng(15);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t n = 4 + static_cast<std::size_t>(rep % 3);
    const std::size_t r = 1 + static_cast<std::size_t>(rep % 3);  // rank
    // Rank-r product of n x r and r x n factors.
    CMatrix u(n, r), v(r, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        u(i, j) = rng.c();
        v(j, i) = rng.c();
      }
    const CMatrix a = u * v;
    const CMatrix basis = null_space(a, 1e-10);
    REQUIRE(basis.cols() == n - r);
    for (std::size_t j = 0; j < basis.cols(); ++j)
      REQUIRE(norm2(matvec(a, basis.column(j))) < 1e-9 * a.frobenius_norm());
    const CMatrix g = basis.adjoint() * basis;
    REQUIRE((g - CMatrix::identity(n - r)).max_abs() < 1e-11);
  }
}

TEST_CASE("fidelity closed forms and preconditions") {
  CMatrix exc(2, 2);
  exc(0, 0) = 1.0;  // |e><e|
  CMatrix gnd(2, 2);
  gnd(1, 1) = 1.0;
  CMatrix mixed = CMatrix::identity(2);
  mixed *= 0.5;

  REQUIRE(fidelity(exc, exc) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(fidelity(exc, gnd) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(fidelity(mixed, exc) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));

  oracles::Rng rng(16);
  for (int rep = 0; rep < 6; ++rep) {
    const CMatrix rho = oracles::random_state(rng, 3);
    const CMatrix sig = oracles::random_state(rng, 3);
    const double f = fidelity(rho, sig);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0 + 1e-9);
    REQUIRE(fidelity(rho, rho) == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(fidelity(rho, sig) == Catch::Approx(fidelity(sig, rho)).margin(1e-10));
  }

  CMatrix bad = exc;
  bad(0, 0) = 2.0;  // trace 2
  REQUIRE_THROWS_AS(fidelity(bad, exc), Error);
  CMatrix neg(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  REQUIRE_THROWS_AS(fidelity(neg, exc), Error);
}

TEST_CASE("psd_sqrt squares back") {
  oracles::Rng rng(17);
  const CMatrix rho = oracles::random_state(rng, 4);
  const CMatrix s = psd_sqrt(rho);
  REQUIRE((s * s - rho).max_abs() < 1e-11);
}
