#pragma once

#include <cstddef>
#include <vector>

#include "effham/eig.hpp"
#include "effham/expm.hpp"
#include "effham/lindblad.hpp"
#include "effham/nullspace.hpp"

namespace effham {

/// One coupling operator of a multi-component master equation: R maps
/// component `from_j` into component `to_k`; `lambda` distinguishes parallel
/// channels between the same pair.
struct Transition {
  std::size_t to_k = 0;
  std::size_t from_j = 0;
  std::size_t lambda = 0;
  CMatrix matrix;
};

/// Coupled master equations for a tuple (rho_1, ..., rho_K) of unnormalized
/// component states; only the total trace is conserved:
///   d rho_k/dt = -i[H_k, rho_k]
///              + sum_{j,l} ( R_kj^l rho_j R_kj^l†
///                            - 1/2 { R_jk^l† R_jk^l , rho_k } ).
struct GeneralizedLindbladModel {
  std::size_t dim = 0;         // N, shared by every component
  std::size_t components = 0;  // K
  std::vector<CMatrix> hamiltonians;
  std::vector<Transition> transitions;
};

inline void validate(const GeneralizedLindbladModel& m) {
  if (m.dim < 1 || m.components < 1)
    throw Error(ErrorCode::BadConfig, "need at least one level and one component", "dim");
  if (m.components * m.dim * m.dim > 64)
    throw Error(ErrorCode::BadConfig, "composite dimension K*N^2 exceeds 64", "dim");
  if (m.hamiltonians.size() != m.components)
    throw Error(ErrorCode::DimensionMismatch, "need one Hamiltonian per component",
                "hamiltonians");
  for (const auto& h : m.hamiltonians) {
    if (h.rows() != m.dim || h.cols() != m.dim)
      throw Error(ErrorCode::DimensionMismatch, "hamiltonian shape does not match dim",
                  "hamiltonians");
    if (h.hermiticity_defect() > 1e-10)
      throw Error(ErrorCode::NotHermitian, "component Hamiltonian is not Hermitian",
                  "hamiltonians");
  }
  for (const auto& t : m.transitions) {
    if (t.to_k >= m.components || t.from_j >= m.components)
      throw Error(ErrorCode::BadConfig, "transition component index out of range", "transitions");
    if (t.matrix.rows() != m.dim || t.matrix.cols() != m.dim)
      throw Error(ErrorCode::DimensionMismatch, "transition operator shape does not match dim",
                  "transitions");
  }
}

/// Tuple of component operators; rho_k = blocks[k].
using BlockOperator = std::vector<CMatrix>;

inline cplx block_trace(const BlockOperator& op) {
  cplx tr = 0.0;
  for (const auto& b : op) tr += b.trace();
  return tr;
}

/// Stacked composite wave function: component k occupies the slice
/// [k*N^2, (k+1)*N^2), each slice row-major stacked as in vectorize().
struct BlockState {
  std::size_t dim = 0;
  std::size_t components = 0;
  CVector amplitudes;
};

inline BlockState vectorize_blocks(const BlockOperator& op) {
  if (op.empty()) throw Error(ErrorCode::BadLength, "empty block operator");
  BlockState s;
  s.components = op.size();
  s.dim = op[0].rows();
  s.amplitudes.resize(s.components * s.dim * s.dim);
  for (std::size_t k = 0; k < s.components; ++k) {
    if (op[k].rows() != s.dim || op[k].cols() != s.dim)
      throw Error(ErrorCode::DimensionMismatch, "component shapes differ");
    const CompositeState part = vectorize(op[k]);
    std::copy(part.amplitudes.begin(), part.amplitudes.end(),
              s.amplitudes.begin() + static_cast<std::ptrdiff_t>(k * s.dim * s.dim));
  }
  return s;
}

inline BlockOperator unvectorize_blocks(const CVector& amplitudes, std::size_t components) {
  if (components < 1 || amplitudes.size() % components != 0)
    throw Error(ErrorCode::BadLength, "vector length is not divisible by component count");
  const std::size_t n2 = amplitudes.size() / components;
  BlockOperator op;
  op.reserve(components);
  for (std::size_t k = 0; k < components; ++k) {
    CVector slice(amplitudes.begin() + static_cast<std::ptrdiff_t>(k * n2),
                  amplitudes.begin() + static_cast<std::ptrdiff_t>((k + 1) * n2));
    op.push_back(unvectorize(slice));
  }
  return op;
}

/// Direct evaluation of the coupled master equations; the independent
/// reference for the block effective Hamiltonian.
inline BlockOperator generalized_action(const GeneralizedLindbladModel& m,
                                        const BlockOperator& rho) {
  validate(m);
  if (rho.size() != m.components)
    throw Error(ErrorCode::DimensionMismatch, "state component count does not match model");
  BlockOperator out(m.components, CMatrix(m.dim, m.dim));
  for (std::size_t k = 0; k < m.components; ++k)
    out[k] = cplx(0.0, -1.0) * (m.hamiltonians[k] * rho[k] - rho[k] * m.hamiltonians[k]);
  for (const auto& t : m.transitions) {
    // Gain in the target component...
    out[t.to_k] += t.matrix * rho[t.from_j] * t.matrix.adjoint();
    // ...balanced by loss in the source component.
    const CMatrix g = t.matrix.adjoint() * t.matrix;
    out[t.from_j] -= 0.5 * (g * rho[t.from_j] + rho[t.from_j] * g);
  }
  return out;
}

/// Block effective Hamiltonian on the K*N^2 composite space:
///   block (k,j) = delta_kj [ Heff_k x I - I x conj(Heff_k) ]
///               + i sum_l R_kj^l x conj(R_kj^l),
/// with Heff_k = H_k - (i/2) sum_{j,l} R_jk^l† R_jk^l (loss out of k).
inline CMatrix block_effective_hamiltonian(const GeneralizedLindbladModel& m) {
  validate(m);
  const std::size_t n = m.dim, n2 = n * n, total = m.components * n2;
  const CMatrix id = CMatrix::identity(n);

  std::vector<CMatrix> heff = m.hamiltonians;
  for (const auto& t : m.transitions) {
    CMatrix g = t.matrix.adjoint() * t.matrix;
    g *= cplx(0.0, -0.5);
    heff[t.from_j] += g;
  }

  CMatrix big(total, total);
  auto add_block = [&](std::size_t bk, std::size_t bj, const CMatrix& blk) {
    for (std::size_t r = 0; r < n2; ++r)
      for (std::size_t c = 0; c < n2; ++c) big(bk * n2 + r, bj * n2 + c) += blk(r, c);
  };
  for (std::size_t k = 0; k < m.components; ++k)
    add_block(k, k, kron(heff[k], id) - kron(id, ancilla_conjugate(heff[k])));
  for (const auto& t : m.transitions) {
    CMatrix jump = kron(t.matrix, ancilla_conjugate(t.matrix));
    jump *= cplx(0.0, 1.0);
    add_block(t.to_k, t.from_j, jump);
  }
  return big;
}

inline void require_block_state(const GeneralizedLindbladModel& m, const BlockOperator& rho) {
  if (rho.size() != m.components)
    throw Error(ErrorCode::DimensionMismatch, "state component count does not match model");
  cplx total = 0.0;
  for (const auto& b : rho) {
    if (b.rows() != m.dim || b.cols() != m.dim)
      throw Error(ErrorCode::DimensionMismatch, "component state shape does not match model");
    if (b.hermiticity_defect() > 1e-8)
      throw Error(ErrorCode::NotAState, "component state is not Hermitian");
    total += b.trace();
  }
  if (std::abs(total - cplx(1.0)) > 1e-8)
    throw Error(ErrorCode::NotAState, "total trace differs from one");
}

inline BlockOperator propagate_blocks(const GeneralizedLindbladModel& m, const BlockOperator& rho0,
                                      double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::BadConfig, "time must be nonnegative", "t");
  require_block_state(m, rho0);
  CMatrix gen = block_effective_hamiltonian(m);
  gen *= cplx(0.0, -t);
  return unvectorize_blocks(matvec(expm(gen), vectorize_blocks(rho0).amplitudes), m.components);
}

inline std::vector<BlockOperator> propagate_blocks_grid(const GeneralizedLindbladModel& m,
                                                        const BlockOperator& rho0, double t0,
                                                        double t1, std::size_t steps) {
  if (!(t1 >= t0) || !(t0 >= 0.0)) throw Error(ErrorCode::BadConfig, "bad time window", "t");
  if (steps < 1) throw Error(ErrorCode::BadConfig, "need at least one step", "steps");
  require_block_state(m, rho0);
  const CMatrix gen = block_effective_hamiltonian(m);
  const double h = (t1 - t0) / static_cast<double>(steps);
  const CMatrix u = expm(gen * cplx(0.0, -h));
  CVector psi = matvec(expm(gen * cplx(0.0, -t0)), vectorize_blocks(rho0).amplitudes);
  std::vector<BlockOperator> out;
  out.reserve(steps + 1);
  out.push_back(unvectorize_blocks(psi, m.components));
  for (std::size_t s = 0; s < steps; ++s) {
    psi = matvec(u, psi);
    out.push_back(unvectorize_blocks(psi, m.components));
  }
  return out;
}

/// Damping basis of the block superoperator; right tuples A_nu, left tuples
/// B_nu with sum_k Tr(A_mu^k B_nu^k) = delta_{mu nu}, eigenvalues those of
/// the generator -i H.
struct BlockDampingBasis {
  CVector eigenvalues;
  std::vector<BlockOperator> right;
  std::vector<BlockOperator> left;
  std::vector<std::vector<std::size_t>> clusters;
  double residual_norm = 0.0;
};

inline cplx block_pairing(const BlockOperator& a, const BlockOperator& b) {
  cplx p = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) p += (a[k] * b[k]).trace();
  return p;
}

inline BlockDampingBasis generalized_damping_basis(const GeneralizedLindbladModel& m) {
  CMatrix gen = block_effective_hamiltonian(m);
  gen *= cplx(0.0, -1.0);
  const EigenSystem e = eig_full(gen);
  BlockDampingBasis b;
  b.eigenvalues = e.eigenvalues;
  b.clusters = e.clusters;
  b.residual_norm = e.residual_norm;
  const std::size_t total = gen.rows();
  for (std::size_t j = 0; j < total; ++j) {
    b.right.push_back(unvectorize_blocks(e.right_vectors.column(j), m.components));
    BlockOperator left = unvectorize_blocks(e.left_vectors.row(j), m.components);
    for (auto& blk : left) blk = blk.transpose();
    b.left.push_back(std::move(left));
  }
  return b;
}

struct BlockSteadyState {
  BlockOperator rho;
  bool trace_normalized = false;
};

inline std::vector<BlockSteadyState> generalized_steady_states(const GeneralizedLindbladModel& m,
                                                               double tol = 1e-10) {
  const CMatrix basis = null_space(block_effective_hamiltonian(m), tol);
  std::vector<BlockSteadyState> out;
  for (std::size_t j = 0; j < basis.cols(); ++j) {
    BlockOperator rho = unvectorize_blocks(basis.column(j), m.components);
    double scale = 0.0;
    for (auto& blk : rho) {
      blk = blk.hermitized();
      scale += blk.frobenius_norm();
    }
    if (scale <= 1e-12) continue;
    const cplx tr = block_trace(rho);
    BlockSteadyState s;
    if (std::abs(tr) > 1e-9) {
      for (auto& blk : rho) blk *= 1.0 / tr;
      s.trace_normalized = true;
    }
    s.rho = std::move(rho);
    out.push_back(std::move(s));
  }
  return out;
}

/// View of a single-component model as the Markovian special case.
inline LindbladModel as_markovian(const GeneralizedLindbladModel& m) {
  validate(m);
  if (m.components != 1)
    throw Error(ErrorCode::BadConfig, "only single-component models reduce", "components");
  LindbladModel single;
  single.dim = m.dim;
  single.hamiltonian = m.hamiltonians[0];
  for (const auto& t : m.transitions) single.lindblad_ops.push_back(t.matrix);
  return single;
}

}  // namespace effham
