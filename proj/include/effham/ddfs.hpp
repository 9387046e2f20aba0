#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "effham/generalized.hpp"
#include "effham/lindblad.hpp"

namespace effham {

/// Diagnostics for a candidate decoherence-free subspace, spanned by
/// composite vectors Phi_l. The subspace qualifies when every jump operator
/// acts on it as a scalar, the span is invariant under the reduced dynamics,
/// and (for single-component models) the purity derivative vanishes.
struct DDFSReport {
  bool passes = false;
  CVector betas;                   // fitted scalar per jump channel
  double eigen_residual = 0.0;     // max_l ||(L x I)Phi_l - beta Phi_l||
  double invariance_defect = 0.0;  // max_l ||(I - P) H_reduced Phi_l||
  std::optional<double> purity_residual;  // |d/dt Tr rho^2|, Markovian only
  double tolerance = 0.0;
};

namespace detail {

/// Normalizes, checks the density-matrix symmetry Phi^{pq*} = Phi^{qp}, and
/// returns the vectors alongside an orthonormal span basis.
struct PreparedBasis {
  std::vector<CVector> vectors;  // unit 2-norm
  CMatrix span;                  // orthonormal columns
};

inline PreparedBasis prepare_ddfs_basis(const std::vector<CompositeState>& basis, std::size_t dim,
                                        double tol) {
  if (basis.empty()) throw Error(ErrorCode::BadLength, "candidate basis is empty", "basis");
  PreparedBasis out;
  for (const auto& phi : basis) {
    if (phi.amplitudes.size() != dim * dim)
      throw Error(ErrorCode::BadLength, "basis vector length does not match model", "basis");
    const double nrm = norm2(phi.amplitudes);
    if (nrm <= 0.0) throw Error(ErrorCode::BadLength, "basis vector vanishes", "basis");
    CVector v = (1.0 / nrm) * phi.amplitudes;
    if (unvectorize(v).hermiticity_defect() > std::max(tol, 1e-12))
      throw Error(ErrorCode::NotHermitianSymmetric,
                  "basis vector breaks the symmetry Phi^{pq*} = Phi^{qp}", "basis");
    out.vectors.push_back(std::move(v));
  }

  const std::size_t n2 = dim * dim, cols = out.vectors.size();
  out.span = CMatrix(n2, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    CVector q = out.vectors[j];
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < j; ++i) {
        const CVector qi = out.span.column(i);
        const cplx ov = dot_conj(qi, q);
        for (std::size_t r = 0; r < n2; ++r) q[r] -= ov * qi[r];
      }
    const double rem = norm2(q);
    if (rem < 1e-10)
      throw Error(ErrorCode::DependentBasis, "candidate basis is linearly dependent", "basis");
    out.span.set_column(j, (1.0 / rem) * q);
  }
  return out;
}

inline double complement_norm(const CMatrix& span, const CVector& v) {
  CVector w = v;
  for (std::size_t i = 0; i < span.cols(); ++i) {
    const CVector qi = span.column(i);
    const cplx ov = dot_conj(qi, w);
    for (std::size_t r = 0; r < w.size(); ++r) w[r] -= ov * qi[r];
  }
  return norm2(w);
}

}  // namespace detail

/// Reduced generator on a subspace where each jump operator acts as the
/// scalar beta_k: substituting the eigen-relations into the composite
/// effective Hamiltonian leaves
///   H x I - I x conj(H)
///   - (i/2) sum_k [ beta_k L_k† x I + conj(beta_k) I x conj(L_k)† ]
///   + i sum_k beta_k I x conj(L_k).
inline CMatrix ddfs_reduced_hamiltonian(const LindbladModel& m, const CVector& betas) {
  const CMatrix id = CMatrix::identity(m.dim);
  CMatrix h = kron(m.hamiltonian, id) - kron(id, ancilla_conjugate(m.hamiltonian));
  for (std::size_t k = 0; k < m.lindblad_ops.size(); ++k) {
    const CMatrix& l = m.lindblad_ops[k];
    const cplx b = betas[k];
    h += (cplx(0.0, -0.5) * b) * kron(l.adjoint(), id);
    h += (cplx(0.0, -0.5) * std::conj(b)) * kron(id, ancilla_conjugate(l).adjoint());
    h += (cplx(0.0, 1.0) * b) * kron(id, ancilla_conjugate(l));
  }
  return h;
}

inline DDFSReport ddfs_check(const LindbladModel& m, const std::vector<CompositeState>& basis,
                             double tol = 1e-8) {
  validate(m);
  const auto prep = detail::prepare_ddfs_basis(basis, m.dim, tol);
  const CMatrix id = CMatrix::identity(m.dim);

  DDFSReport rep;
  rep.tolerance = tol;
  for (const auto& l : m.lindblad_ops) {
    const CMatrix act = kron(l, id);
    const CVector first = matvec(act, prep.vectors[0]);
    const cplx beta = dot_conj(prep.vectors[0], first);
    rep.betas.push_back(beta);
    for (const auto& phi : prep.vectors) {
      const CVector lhs = matvec(act, phi);
      rep.eigen_residual = std::max(rep.eigen_residual, norm2(lhs - beta * phi));
    }
  }

  const CMatrix reduced = ddfs_reduced_hamiltonian(m, rep.betas);
  for (const auto& phi : prep.vectors)
    rep.invariance_defect =
        std::max(rep.invariance_defect, detail::complement_norm(prep.span, matvec(reduced, phi)));

  double purity = 0.0;
  for (const auto& phi : prep.vectors) {
    const CMatrix rho = unvectorize(phi).hermitized();
    purity = std::max(purity, std::abs(2.0 * (rho * dissipator_action(m, rho)).trace()));
  }
  rep.purity_residual = purity;

  rep.passes = rep.eigen_residual <= tol && rep.invariance_defect <= tol && purity <= tol;
  return rep;
}

/// Multi-component variant. The eigen-condition demands one scalar per
/// (target component, channel) pair, shared across every source component
/// and every basis vector. Invariance is checked blockwise against the
/// reduced block Hamiltonian obtained by the same substitution as above.
inline DDFSReport ddfs_check_generalized(const GeneralizedLindbladModel& m,
                                         const std::vector<CompositeState>& basis,
                                         double tol = 1e-8) {
  validate(m);
  const auto prep = detail::prepare_ddfs_basis(basis, m.dim, tol);
  const CMatrix id = CMatrix::identity(m.dim);

  DDFSReport rep;
  rep.tolerance = tol;

  // Fit beta_k^lambda from the first transition carrying each channel.
  std::map<std::pair<std::size_t, std::size_t>, cplx> beta;
  for (const auto& t : m.transitions) {
    const auto key = std::make_pair(t.to_k, t.lambda);
    if (beta.count(key)) continue;
    const CVector first = matvec(kron(t.matrix, id), prep.vectors[0]);
    beta[key] = dot_conj(prep.vectors[0], first);
  }
  for (const auto& [key, b] : beta) rep.betas.push_back(b);

  for (const auto& t : m.transitions) {
    const cplx b = beta.at(std::make_pair(t.to_k, t.lambda));
    const CMatrix act = kron(t.matrix, id);
    for (const auto& phi : prep.vectors)
      rep.eigen_residual = std::max(rep.eigen_residual, norm2(matvec(act, phi) - b * phi));
  }

  // Reduced block Hamiltonian, assembled slot by slot so channels sharing a
  // (target, source) pair combine before the defect is measured.
  std::map<std::pair<std::size_t, std::size_t>, CMatrix> blocks;
  for (std::size_t k = 0; k < m.components; ++k)
    blocks.emplace(std::make_pair(k, k), kron(m.hamiltonians[k], id) -
                                             kron(id, ancilla_conjugate(m.hamiltonians[k])));
  auto add_to = [&](std::size_t k, std::size_t j, const CMatrix& term) {
    auto it = blocks.find(std::make_pair(k, j));
    if (it == blocks.end())
      blocks.emplace(std::make_pair(k, j), term);
    else
      it->second += term;
  };
  for (const auto& t : m.transitions) {
    const cplx b = beta.at(std::make_pair(t.to_k, t.lambda));
    add_to(t.from_j, t.from_j, (cplx(0.0, -0.5) * b) * kron(t.matrix.adjoint(), id));
    add_to(t.from_j, t.from_j,
           (cplx(0.0, -0.5) * std::conj(b)) * kron(id, ancilla_conjugate(t.matrix).adjoint()));
    add_to(t.to_k, t.from_j, (cplx(0.0, 1.0) * b) * kron(id, ancilla_conjugate(t.matrix)));
  }

  for (const auto& [key, block] : blocks)
    for (const auto& phi : prep.vectors)
      rep.invariance_defect =
          std::max(rep.invariance_defect, detail::complement_norm(prep.span, matvec(block, phi)));

  rep.passes = rep.eigen_residual <= tol && rep.invariance_defect <= tol;
  return rep;
}

}  // namespace effham
