#pragma once

#include <cmath>
#include <vector>

#include "effham/complex_matrix.hpp"
#include "effham/eig.hpp"
#include "effham/expm.hpp"
#include "effham/nullspace.hpp"

namespace effham {

/// Markovian master-equation model: Hamiltonian plus jump operators, all
/// N x N in one fixed basis.
struct LindbladModel {
  std::size_t dim = 0;
  CMatrix hamiltonian;
  std::vector<CMatrix> lindblad_ops;
};

inline void validate(const LindbladModel& m) {
  if (m.dim < 1 || m.dim > 8)
    throw Error(ErrorCode::BadConfig, "model dimension must be between 1 and 8", "dim");
  if (m.hamiltonian.rows() != m.dim || m.hamiltonian.cols() != m.dim)
    throw Error(ErrorCode::DimensionMismatch, "hamiltonian shape does not match dim",
                "hamiltonian");
  if (m.hamiltonian.hermiticity_defect() > 1e-10)
    throw Error(ErrorCode::NotHermitian, "hamiltonian is not Hermitian", "hamiltonian");
  for (const auto& l : m.lindblad_ops)
    if (l.rows() != m.dim || l.cols() != m.dim)
      throw Error(ErrorCode::DimensionMismatch, "jump operator shape does not match dim",
                  "lindblad_ops");
}

/// Row-major stacking of a density (or any) matrix into the composite
/// system-ancilla wave function; entry (m,n) lands at index m*N + n.
struct CompositeState {
  std::size_t dim = 0;  // system dimension N; the vector has N^2 entries
  CVector amplitudes;
};

inline CompositeState vectorize(const CMatrix& rho) {
  if (rho.rows() != rho.cols())
    throw Error(ErrorCode::DimensionMismatch, "vectorize needs a square matrix");
  CompositeState s;
  s.dim = rho.rows();
  s.amplitudes.resize(s.dim * s.dim);
  for (std::size_t m = 0; m < s.dim; ++m)
    for (std::size_t n = 0; n < s.dim; ++n) s.amplitudes[m * s.dim + n] = rho(m, n);
  return s;
}

inline CMatrix unvectorize(const CVector& amplitudes) {
  const std::size_t len = amplitudes.size();
  std::size_t n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(len))));
  if (n * n != len)
    throw Error(ErrorCode::BadLength, "composite vector length is not a perfect square");
  CMatrix rho(n, n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) rho(m, k) = amplitudes[m * n + k];
  return rho;
}

inline CMatrix unvectorize(const CompositeState& s) { return unvectorize(s.amplitudes); }

/// Ancilla copy of an operator: matrix elements <e_m|O^A|e_n> = <E_n|O†|E_m>,
/// i.e. the elementwise conjugate in the fixed basis.
inline CMatrix ancilla_conjugate(const CMatrix& op) { return op.conjugate(); }

/// Non-Hermitian generator of the composite Schrodinger-like equation
/// i d|Psi>/dt = H_T |Psi>, equivalent to the master equation after
/// vectorization:
///   H_T = Heff x I - I x conj(Heff) + i sum_k L_k x conj(L_k),
/// with Heff = H - (i/2) sum_k L_k† L_k.
inline CMatrix effective_hamiltonian(const LindbladModel& m) {
  validate(m);
  const std::size_t n = m.dim;
  CMatrix heff = m.hamiltonian;
  for (const auto& l : m.lindblad_ops) {
    CMatrix g = l.adjoint() * l;
    g *= cplx(0.0, -0.5);
    heff += g;
  }
  const CMatrix id = CMatrix::identity(n);
  CMatrix ht = kron(heff, id) - kron(id, ancilla_conjugate(heff));
  for (const auto& l : m.lindblad_ops) {
    CMatrix jump = kron(l, ancilla_conjugate(l));
    jump *= cplx(0.0, 1.0);
    ht += jump;
  }
  return ht;
}

/// Direct (never vectorized) evaluation of the Lindblad superoperator,
///   L rho = -i[H, rho] - 1/2 sum_k { L†L rho + rho L†L - 2 L rho L† }.
/// Kept as the independent reference the effective Hamiltonian is checked
/// against.
inline CMatrix lindblad_action(const LindbladModel& m, const CMatrix& rho) {
  validate(m);
  if (rho.rows() != m.dim || rho.cols() != m.dim)
    throw Error(ErrorCode::DimensionMismatch, "state shape does not match model");
  CMatrix out = cplx(0.0, -1.0) * (m.hamiltonian * rho - rho * m.hamiltonian);
  for (const auto& l : m.lindblad_ops) {
    const CMatrix g = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (g * rho + rho * g);
  }
  return out;
}

/// Dissipator-only part of lindblad_action.
inline CMatrix dissipator_action(const LindbladModel& m, const CMatrix& rho) {
  CMatrix out(m.dim, m.dim);
  for (const auto& l : m.lindblad_ops) {
    const CMatrix g = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (g * rho + rho * g);
  }
  return out;
}

inline void require_density_matrix(const CMatrix& rho, std::size_t dim) {
  if (rho.rows() != dim || rho.cols() != dim)
    throw Error(ErrorCode::DimensionMismatch, "state shape does not match model");
  if (rho.hermiticity_defect() > 1e-8)
    throw Error(ErrorCode::NotAState, "initial state is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-8)
    throw Error(ErrorCode::NotAState, "initial state trace differs from one");
}

/// Evolves rho0 to time t through the composite picture,
/// |Psi(t)> = expm(-i H_T t) |Psi(0)>.
inline CMatrix propagate(const LindbladModel& m, const CMatrix& rho0, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::BadConfig, "time must be nonnegative", "t");
  require_density_matrix(rho0, m.dim);
  CMatrix ht = effective_hamiltonian(m);
  ht *= cplx(0.0, -t);
  return unvectorize(matvec(expm(ht), vectorize(rho0).amplitudes));
}

/// Trajectory sampled on a uniform grid over [t0, t1]; one expm of the step
/// generator, applied repeatedly.
inline std::vector<CMatrix> propagate_grid(const LindbladModel& m, const CMatrix& rho0, double t0,
                                           double t1, std::size_t steps) {
  if (!(t1 >= t0) || !(t0 >= 0.0)) throw Error(ErrorCode::BadConfig, "bad time window", "t");
  if (steps < 1) throw Error(ErrorCode::BadConfig, "need at least one step", "steps");
  require_density_matrix(rho0, m.dim);
  CMatrix ht = effective_hamiltonian(m);
  const double h = (t1 - t0) / static_cast<double>(steps);
  const CMatrix u = expm(ht * cplx(0.0, -h));
  CMatrix u0 = expm(ht * cplx(0.0, -t0));
  CVector psi = matvec(u0, vectorize(rho0).amplitudes);
  std::vector<CMatrix> out;
  out.reserve(steps + 1);
  out.push_back(unvectorize(psi));
  for (std::size_t s = 0; s < steps; ++s) {
    psi = matvec(u, psi);
    out.push_back(unvectorize(psi));
  }
  return out;
}

/// Damping basis: eigen-operators A_nu of the superoperator (right) and their
/// duals B_nu (left), normalized to Tr(A_mu B_nu) = delta. The eigenvalues
/// are those of the superoperator itself, i.e. of -i H_T.
struct DampingBasis {
  CVector eigenvalues;
  std::vector<CMatrix> right;  // A_nu
  std::vector<CMatrix> left;   // B_nu
  std::vector<std::vector<std::size_t>> clusters;
  double residual_norm = 0.0;
};

inline DampingBasis damping_basis(const LindbladModel& m) {
  CMatrix gen = effective_hamiltonian(m);
  gen *= cplx(0.0, -1.0);
  const EigenSystem e = eig_full(gen);
  DampingBasis b;
  b.eigenvalues = e.eigenvalues;
  b.clusters = e.clusters;
  b.residual_norm = e.residual_norm;
  const std::size_t n2 = gen.rows();
  b.right.reserve(n2);
  b.left.reserve(n2);
  for (std::size_t j = 0; j < n2; ++j) {
    b.right.push_back(unvectorize(e.right_vectors.column(j)));
    // The left row pairs with right columns through the plain bilinear form;
    // as an operator that is the transpose of its unvectorization.
    b.left.push_back(unvectorize(e.left_vectors.row(j)).transpose());
  }
  return b;
}

struct SteadyState {
  CMatrix rho;
  bool trace_normalized = false;  // false: zero-trace null vector, kept as is
};

/// Null space of the effective Hamiltonian mapped back to operators:
/// Hermitian part projection, then trace normalization where the trace
/// allows it.
inline std::vector<SteadyState> steady_states(const LindbladModel& m, double tol = 1e-10) {
  const CMatrix ht = effective_hamiltonian(m);
  const CMatrix basis = null_space(ht, tol);
  std::vector<SteadyState> out;
  for (std::size_t j = 0; j < basis.cols(); ++j) {
    CMatrix rho = unvectorize(basis.column(j)).hermitized();
    const double scale = rho.frobenius_norm();
    if (scale <= 1e-12) continue;  // purely anti-Hermitian null vector
    const cplx tr = rho.trace();
    SteadyState s;
    if (std::abs(tr) > 1e-9) {
      s.rho = rho * (1.0 / tr);
      s.trace_normalized = true;
    } else {
      s.rho = rho;
      s.trace_normalized = false;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace effham
