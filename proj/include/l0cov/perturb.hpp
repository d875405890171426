#pragma once

// Closed-form determinant ratios and Sherman-Morrison-Woodbury inverse
// updates for symmetric perturbations of a single diagonal entry
// (X + delta*e_i*e_i^T) or a mirrored off-diagonal pair
// (X + delta*(e_i*e_j^T + e_j*e_i^T)).  All formulas are expressed in
// terms of Y = X^{-1} only; X itself is never touched.
//
// Symmetry contract: every matrix produced here is exactly symmetric,
// bit for bit: updates are computed once for the upper triangle and the
// lower triangle is mirrored from it.

#include <cmath>
#include <optional>
#include <utility>

#include "l0cov/types.hpp"

namespace l0cov {

// Denominators with absolute value below this floor signal an update that
// would cross a singularity of the perturbed matrix.
inline constexpr double kDenomFloor = 1e-12;

template <typename Scalar>
struct CholSummaryT {
  DenseMatrix<Scalar> factor;  // lower triangular, M = factor * factor^T
  Scalar logdet;               // 2 * sum(log(diag(factor)))
};
using CholSummary = CholSummaryT<double>;

/// Cholesky factorization with log-determinant; nullopt when M is not
/// positive definite (some pivot fails to be strictly positive).
template <typename Derived>
std::optional<CholSummaryT<typename Derived::Scalar>> cholesky(
    const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  Eigen::LLT<DenseMatrix<Scalar>> llt(M);
  if (llt.info() != Eigen::Success) return std::nullopt;
  DenseMatrix<Scalar> L = llt.matrixL();
  Scalar half_logdet = Scalar(0);
  for (Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > Scalar(0))) return std::nullopt;
    half_logdet += std::log(L(i, i));
  }
  return CholSummaryT<Scalar>{std::move(L), Scalar(2) * half_logdet};
}

/// det(X + delta*e_i*e_i^T) / det(X) = 1 + delta*y_ii.
template <typename Derived>
typename Derived::Scalar det_ratio_diag(const Eigen::MatrixBase<Derived>& Y,
                                        Index i,
                                        typename Derived::Scalar delta) {
  return typename Derived::Scalar(1) + delta * Y(i, i);
}

/// y_ii*y_jj - y_ij^2; strictly positive whenever Y is positive definite.
template <typename Derived>
typename Derived::Scalar schur_delta(const Eigen::MatrixBase<Derived>& Y,
                                     Index i, Index j) {
  return Y(i, i) * Y(j, j) - Y(i, j) * Y(i, j);
}

/// det(X + delta*(e_i*e_j^T + e_j*e_i^T)) / det(X)
///   = -(y_ii*y_jj - y_ij^2)*delta^2 + 2*y_ij*delta + 1,   i != j.
template <typename Derived>
typename Derived::Scalar det_ratio_offdiag(const Eigen::MatrixBase<Derived>& Y,
                                           Index i, Index j,
                                           typename Derived::Scalar delta) {
  using Scalar = typename Derived::Scalar;
  return -schur_delta(Y, i, j) * delta * delta +
         Scalar(2) * Y(i, j) * delta + Scalar(1);
}

/// In-place rank-one inverse update:
///   Y <- Y - delta * y_[i]*y_[i]^T / (1 + delta*y_ii).
/// Y must equal X^{-1} on entry; afterwards it equals
/// (X + delta*e_i*e_i^T)^{-1}.
template <typename Scalar>
void smw_update_diag_inplace(DenseMatrix<Scalar>& Y, Index i, Scalar delta,
                             Scalar denom_floor = Scalar(kDenomFloor)) {
  const Scalar denom = Scalar(1) + delta * Y(i, i);
  if (std::abs(denom) < denom_floor)
    throw SingularUpdate("diagonal inverse update: |1 + delta*y_ii| below floor");
  if (delta == Scalar(0)) return;
  const DenseVector<Scalar> u = Y.col(i);
  const Scalar scale = delta / denom;
  const Index p = Y.rows();
  for (Index c = 0; c < p; ++c) {
    const Scalar w = scale * u(c);
    for (Index r = 0; r <= c; ++r) Y(r, c) -= u(r) * w;
  }
  Y.template triangularView<Eigen::StrictlyLower>() = Y.transpose();
}

/// In-place rank-two inverse update for the mirrored off-diagonal
/// perturbation; the 2x2 capacitance form expands into three symmetric
/// outer-product terms.
template <typename Scalar>
void smw_update_offdiag_inplace(DenseMatrix<Scalar>& Y, Index i, Index j,
                                Scalar delta,
                                Scalar denom_floor = Scalar(kDenomFloor)) {
  const Scalar y_ii = Y(i, i);
  const Scalar y_jj = Y(j, j);
  const Scalar y_ij = Y(i, j);
  const Scalar ratio = -(y_ii * y_jj - y_ij * y_ij) * delta * delta +
                       Scalar(2) * y_ij * delta + Scalar(1);
  if (std::abs(ratio) < denom_floor)
    throw SingularUpdate("off-diagonal inverse update: det ratio below floor");
  if (delta == Scalar(0)) return;
  const DenseVector<Scalar> u = Y.col(i);
  const DenseVector<Scalar> v = Y.col(j);
  const Scalar scale = delta / ratio;
  const Scalar a = scale * (Scalar(1) + delta * y_ij);  // u v^T + v u^T weight
  const Scalar bu = scale * delta * y_jj;               // u u^T weight
  const Scalar bv = scale * delta * y_ii;               // v v^T weight
  // per entry: a*(u_r v_c + v_r u_c) - bu*u_r u_c - bv*v_r v_c
  //          = u_r*(a*v_c - bu*u_c) + v_r*(a*u_c - bv*v_c)
  const Index p = Y.rows();
  for (Index c = 0; c < p; ++c) {
    const Scalar w1 = a * v(c) - bu * u(c);
    const Scalar w2 = a * u(c) - bv * v(c);
    for (Index r = 0; r <= c; ++r) Y(r, c) -= u(r) * w1 + v(r) * w2;
  }
  Y.template triangularView<Eigen::StrictlyLower>() = Y.transpose();
}

/// (X + delta*e_i*e_i^T)^{-1} from Y = X^{-1}.
template <typename Scalar>
DenseMatrix<Scalar> smw_update_diag(const DenseMatrix<Scalar>& Y, Index i,
                                    Scalar delta,
                                    Scalar denom_floor = Scalar(kDenomFloor)) {
  DenseMatrix<Scalar> out = Y;
  smw_update_diag_inplace(out, i, delta, denom_floor);
  return out;
}

/// (X + delta*(e_i*e_j^T + e_j*e_i^T))^{-1} from Y = X^{-1}.
template <typename Scalar>
DenseMatrix<Scalar> smw_update_offdiag(const DenseMatrix<Scalar>& Y, Index i,
                                       Index j, Scalar delta,
                                       Scalar denom_floor = Scalar(kDenomFloor)) {
  DenseMatrix<Scalar> out = Y;
  smw_update_offdiag_inplace(out, i, j, delta, denom_floor);
  return out;
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& M,
                  typename Derived::Scalar abs_tol) {
  if (M.rows() != M.cols()) return false;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < j; ++i)
      if (!(std::abs(M(i, j) - M(j, i)) <= abs_tol)) return false;
  return true;
}

/// Exact symmetrization by averaging the two triangles.
template <typename Scalar>
void symmetrize_average(DenseMatrix<Scalar>& M) {
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < j; ++i) {
      const Scalar v = (M(i, j) + M(j, i)) / Scalar(2);
      M(i, j) = v;
      M(j, i) = v;
    }
}

/// Fresh inverse and log-determinant from a Cholesky factorization.
/// Returned inverse is exactly symmetric.
template <typename Derived, typename Scalar = typename Derived::Scalar>
std::pair<DenseMatrix<Scalar>, Scalar> pd_inverse_logdet(
    const Eigen::MatrixBase<Derived>& M) {
  auto chol = cholesky(M);
  if (!chol) throw NotPositiveDefinite("pd_inverse_logdet: matrix is not PD");
  const Index p = M.rows();
  DenseMatrix<Scalar> inv = DenseMatrix<Scalar>::Identity(p, p);
  chol->factor.template triangularView<Eigen::Lower>().solveInPlace(inv);
  chol->factor.transpose()
      .template triangularView<Eigen::Upper>()
      .solveInPlace(inv);
  symmetrize_average(inv);
  return {std::move(inv), chol->logdet};
}

}  // namespace l0cov
