// Tests for the adiabaticity diagnostics: the leakage measure on eigenvalue
// tracks, coefficient transport along them, and the two-band ramp scan.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "effham/adiabatic.hpp"
#include "effham/expm.hpp"
#include "effham/invariant.hpp"
#include "effham/generalized.hpp"
#include "effham/scan.hpp"
#include "effham/two_band.hpp"
#include "oracles.hpp"

using namespace effham;

namespace {

// Two-band dissipative model generator at fixed rates, as the vectorized
// block generator G with d psi/dt = G psi.
CMatrix two_band_generator(double g1, double g2) {
  const auto blocks = block_effective_hamiltonian(two_band::model(g1, g2));
  CMatrix g = blocks * cplx(0.0, -1.0);
  return g;
}

// Avoided-crossing sweep: H(t) = (gap/2) sx + (rate t / 2) sz.
CMatrix sweep_hamiltonian(double gap, double rate, double t) {
  CMatrix h(2, 2);
  h(0, 0) = cplx(0.5 * rate * t, 0.0);
  h(1, 1) = -h(0, 0);
  h(0, 1) = h(1, 0) = cplx(0.5 * gap, 0.0);
  return h;
}

double sweep_measure_exact(double gap, double rate, double t) {
  const double e2 = gap * gap + rate * rate * t * t;
  return gap * rate / (2.0 * std::pow(e2, 1.5));
}

}  // namespace

TEST_CASE("static generator transports exactly and reports zero measure") {
  const CMatrix g = two_band_generator(0.8, 1.3);
  const double t_end = 2.0;
  const auto gen = sample_generator(0.0, t_end, 401, [&](double) { return g; });
  const auto tracks = track_eigensystem(gen);

  // No eigenvector motion anywhere on the grid.
  for (std::size_t i : {std::size_t{0}, std::size_t{200}, std::size_t{400}}) {
    CHECK(adiabatic_gamma(tracks, i) <= 1e-10);
  }

  // Transport along static tracks is the exact matrix exponential flow.
  oracles::Rng rng(501);
  const CMatrix rho1 = oracles::random_state(rng, 2);
  const CMatrix rho2 = oracles::random_state(rng, 2);
  CVector psi0(8);
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t n = 0; n < 2; ++n) {
      psi0[2 * m + n] = 0.5 * rho1(m, n);
      psi0[4 + 2 * m + n] = 0.5 * rho2(m, n);
    }

  const auto flow = adiabatic_propagate(tracks, psi0, 2);
  REQUIRE(flow.states.size() == gen.times.size());
  for (std::size_t i = 0; i < gen.times.size(); ++i) {
    const CVector exact = matvec(expm(g * cplx(gen.times[i], 0.0)), psi0);
    CHECK(norm2(flow.states[i] - exact) <= 1e-9);
  }
  REQUIRE(flow.trace_drift.has_value());
  CHECK(*flow.trace_drift <= 1e-9);
}

TEST_CASE("avoided-crossing sweep matches the closed-form adiabaticity measure") {
  struct Combo {
    double gap, rate;
    std::size_t points;
  };
  for (const Combo& c : {Combo{1.0, 0.5, 1201}, Combo{0.7, 2.0, 2401}}) {
    const auto gen = sample_generator(-3.0, 3.0, c.points, [&](double t) {
      return sweep_hamiltonian(c.gap, c.rate, t) * cplx(0.0, -1.0);
    });
    const auto tracks = track_eigensystem(gen);
    for (double frac : {0.25, 0.5, 0.75}) {
      const std::size_t idx = static_cast<std::size_t>(frac * (c.points - 1));
      const double got = adiabatic_gamma(tracks, idx);
      const double want = sweep_measure_exact(c.gap, c.rate, gen.times[idx]);
      CHECK(std::abs(got - want) <= 1e-3 * want);
    }
  }
}

TEST_CASE("adiabaticity measure ignores per-track phase gauges") {
  const auto gen = sample_generator(-2.0, 2.0, 2001, [&](double t) {
    return sweep_hamiltonian(1.0, 0.8, t) * cplx(0.0, -1.0);
  });
  auto tracks = track_eigensystem(gen);
  const std::size_t idx = 1000;
  const double before = adiabatic_gamma(tracks, idx);

  // Multiply each track by its own smooth unit-modulus phase field; duals
  // carry the conjugate phase.  The finite-difference derivative mixes the
  // phase field into the cross element at O(h^2 x field curvature), so a
  // slow field on this grid keeps the change an order below the tolerance.
  for (std::size_t i = 0; i < tracks.points(); ++i) {
    for (std::size_t j = 0; j < tracks.dim(); ++j) {
      const double a = 0.05 + 0.01 * static_cast<double>(j);
      const cplx ph = std::exp(cplx(0.0, a * std::sin(0.5 * tracks.times[i] + static_cast<double>(j))));
      for (std::size_t r = 0; r < tracks.dim(); ++r) {
        tracks.right[i](r, j) *= ph;
        tracks.left[i](j, r) /= ph;
      }
    }
  }
  const double after = adiabatic_gamma(tracks, idx);
  CHECK(std::abs(after - before) <= 1e-8 * before);
}

TEST_CASE("proportional rate ramps stay adiabatic in the two-band model") {
  // When both decay rates ramp proportionally the stationary direction is
  // constant in time, so the leakage measure at the endpoint vanishes and
  // conservation diagnostics stay at machine level.
  ScanConfig cfg;
  cfg.gamma1_values = {1.7};
  cfg.dgamma1_values = {1.7};
  const auto grid = run_scan(cfg);
  const auto& cell = grid.at(0, 0);
  REQUIRE(cell.ok);
  CHECK(cell.gamma_char <= 1e-9);
  CHECK(cell.trace_deviation <= 1e-12);
  CHECK(cell.hermiticity_defect <= 1e-12);
  CHECK(cell.min_eigenvalue >= -1e-8);
}

TEST_CASE("measure grows with the ramp-rate mismatch") {
  // Along a row of fixed endpoint rate the endpoint measure is proportional
  // to the rate-mismatch bilinear |dg1*g2 - g1*dg2|, hence strictly
  // increasing once the slope exceeds the endpoint value.
  ScanConfig cfg;
  cfg.gamma1_values = {0.2};
  cfg.dgamma1_values = {0.5, 1.0, 2.0, 3.0};
  const auto grid = run_scan(cfg);

  std::vector<double> gammas;
  std::vector<double> ratios;
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& cell = grid.at(0, j);
    REQUIRE(cell.ok);
    gammas.push_back(cell.gamma_char);
    ratios.push_back(cell.gamma_char / (cell.dgamma1_end * 1.0 - 0.2 * 1.0));
  }
  CHECK(gammas[0] < gammas[1]);
  CHECK(gammas[1] < gammas[2]);
  CHECK(gammas[2] < gammas[3]);
  // Proportionality to the mismatch: the shared prefactor is a property of
  // the endpoint rates only, which are identical across the row.
  for (std::size_t j = 1; j < 4; ++j) {
    CHECK(std::abs(ratios[j] - ratios[0]) <= 1e-2 * ratios[0]);
  }
}

TEST_CASE("slow ramps track the stationary family and fast ramps leak") {
  ScanConfig cfg;
  cfg.gamma1_values = {1.5};
  cfg.dgamma1_values = {1e-3, 5.0};
  cfg.gamma2_slope = 0.0;  // only the first band's rate ramps
  const auto grid = run_scan(cfg);

  const auto& slow = grid.at(0, 0);
  const auto& fast = grid.at(0, 1);
  REQUIRE(slow.ok);
  REQUIRE(fast.ok);
  CHECK(slow.one_minus_f <= 1e-6);
  CHECK(1.0 - slow.one_minus_f >= 0.999);
  CHECK(fast.one_minus_f >= 1e-3);
  CHECK(fast.gamma_char > 100.0 * slow.gamma_char);
}

TEST_CASE("fully degenerate generators cannot define the measure") {
  const auto gen = sample_generator(0.0, 1.0, 50, [](double t) {
    CMatrix g = CMatrix::identity(2);
    g *= cplx(0.0, -(1.0 + 0.3 * t));
    return g;
  });
  const auto tracks = track_eigensystem(gen);
  CHECK_THROWS_MATCHES(adiabatic_gamma(tracks, 25), Error, ErrorCodeIs(ErrorCode::AllDegenerate));
  CHECK_THROWS_MATCHES(adiabatic_gamma(tracks, 99), Error, ErrorCodeIs(ErrorCode::BadConfig));
}

TEST_CASE("adiabatic transport reports block trace drift") {
  const double t_end = 1.0;
  const auto gen = sample_generator(0.0, t_end, 801, [&](double t) {
    const double g1 = std::max(1e-3, 2.0 + 1.5 * (t - t_end));
    const double g2 = std::max(1e-3, 1.0 + 1.0 * (t - t_end));
    return two_band_generator(g1, g2);
  });
  const auto tracks = track_eigensystem(gen);

  BlockOperator init(2, CMatrix(2, 2));
  init[0](0, 0) = cplx(0.6, 0.0);
  init[0](1, 1) = cplx(0.4, 0.0);
  const CVector psi0 = vectorize_blocks(init).amplitudes;

  const auto with_shape = adiabatic_propagate(tracks, psi0, 2);
  REQUIRE(with_shape.trace_drift.has_value());
  CHECK(*with_shape.trace_drift > 0.0);
  CHECK(*with_shape.trace_drift <= 1e-3);

  // Without a declared component shape no trace diagnostic is defined.
  const auto without_shape = adiabatic_propagate(tracks, psi0, 0);
  CHECK_FALSE(without_shape.trace_drift.has_value());
}

TEST_CASE("scan results are deterministic and thread-count independent") {
  ScanConfig cfg;
  cfg.gamma1_values = {0.5, 2.0};
  cfg.dgamma1_values = {0.3, 2.5};
  cfg.steps = 600;

  const auto first = run_scan(cfg);
  const auto second = run_scan(cfg);
  cfg.jobs = 3;
  const auto parallel = run_scan(cfg);

  REQUIRE(first.cells.size() == 4);
  for (std::size_t k = 0; k < first.cells.size(); ++k) {
    const auto& a = first.cells[k];
    const auto& b = second.cells[k];
    const auto& c = parallel.cells[k];
    REQUIRE(a.ok);
    CHECK(a.gamma_char == b.gamma_char);
    CHECK(a.one_minus_f == b.one_minus_f);
    CHECK(a.trace_deviation == b.trace_deviation);
    CHECK(a.gamma_char == c.gamma_char);
    CHECK(a.one_minus_f == c.one_minus_f);
    CHECK(a.min_eigenvalue == c.min_eigenvalue);
  }
  CHECK(first.max_trace_deviation == parallel.max_trace_deviation);
}

TEST_CASE("scan accepts an explicit initial block state") {
  ScanConfig cfg;
  cfg.gamma1_values = {1.0};
  cfg.dgamma1_values = {0.5};
  cfg.steps = 600;

  BlockOperator init(2, CMatrix(2, 2));
  init[0](0, 0) = cplx(0.7, 0.0);  // upper-band excited population
  init[0](1, 1) = cplx(0.3, 0.0);
  cfg.initial = init;

  const auto grid = run_scan(cfg);
  const auto& cell = grid.at(0, 0);
  REQUIRE(cell.ok);
  CHECK(std::isfinite(cell.gamma_char));
  CHECK(std::isfinite(cell.one_minus_f));
  CHECK(cell.trace_deviation <= 1e-10);
}

TEST_CASE("scan validation rejects malformed configurations") {
  ScanConfig good;
  good.gamma1_values = {1.0};
  good.dgamma1_values = {1.0};

  auto broken = good;
  broken.gamma1_values.clear();
  CHECK_THROWS_MATCHES(run_scan(broken), Error, ErrorCodeIs(ErrorCode::EmptyGrid));

  broken = good;
  broken.steps = 50;
  CHECK_THROWS_MATCHES(run_scan(broken), Error, ErrorCodeIs(ErrorCode::BadConfig));

  broken = good;
  broken.duration = -1.0;
  CHECK_THROWS_MATCHES(run_scan(broken), Error, ErrorCodeIs(ErrorCode::BadConfig));

  broken = good;
  broken.jobs = 0;
  CHECK_THROWS_MATCHES(run_scan(broken), Error, ErrorCodeIs(ErrorCode::BadConfig));

  broken = good;
  broken.rate_floor = 0.0;
  CHECK_THROWS_MATCHES(run_scan(broken), Error, ErrorCodeIs(ErrorCode::BadConfig));
}
