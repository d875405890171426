#pragma once

// Cyclic coordinate descent for the l0-penalized Gaussian log-likelihood
//
//   L(X) = -log det(X) + tr(S*X) + lambda*||X||_0,   X symmetric PD,
//
// where ||X||_0 counts every nonzero entry (diagonal included).  One sweep
// visits the diagonal and the upper triangle in row-major order; each visit
// replaces x_ij (mirrored to x_ji) by the exact minimizer of L along that
// coordinate, maintaining Y = X^{-1} and log det(X) incrementally through
// the rank-one/rank-two inverse updates in perturb.hpp.
//
// Zeros are stored as literal 0.0, so the l0 term needs no threshold.

#include <utility>
#include <vector>

#include "l0cov/perturb.hpp"
#include "l0cov/types.hpp"

namespace l0cov {

struct SolverConfig {
  double rel_tol = 1e-8;       // stop when |L - L'|/|L| drops below this
  int max_sweeps = 500;
  int refresh_period = 10;     // sweeps between Cholesky re-inversions
  int active_set_only_after = -1;  // <0 disables the nonzero-only speedup
  double denom_floor = 1e-12;
  // stationarity polish: convergence additionally requires the tracked
  // max |y_ij - s_ij| over the diagonal and nonzero off-diagonals to fall
  // below this; the objective rel-change rule alone leaves that residual
  // near sqrt(rel_tol * |L|), far above the 1e-6 the estimates must meet.
  // Set to infinity for the bare rel-change rule.
  double fp_tol = 8e-7;
};

struct SolveReport {
  int sweeps_used = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;  // one entry per sweep, non-increasing
  bool converged = false;
  double fixed_point_max_residual = 0.0;
  int nnz_offdiag = 0;
};

struct SolverState {
  Matrix X;         // current iterate
  Matrix Y;         // X^{-1}, maintained incrementally
  Matrix S;         // sample covariance (exactly symmetric)
  double logdet_x = 0.0;
  double lambda = 0.0;
  int sweep_count = 0;
  double last_objective = 0.0;
};

/// Diagonal start X = diag(1/s_11, ..., 1/s_pp).
/// Throws BadCovariance if S is asymmetric beyond 1e-9 or some s_ii <= 0.
SolverState init_state(const Matrix& S, double lambda);

/// Closed-form 1-D minimizer for a diagonal entry:
///   m_ii = x_ii + (y_ii - s_ii) / (y_ii * s_ii).
double minimizer_diag(const SolverState& state, Index i);

/// Unique admissible stationary point of the smooth part for an
/// off-diagonal entry.  Throws DriftDetected when the Schur quantity of Y
/// at (i, j) fails to be strictly positive.
double minimizer_offdiag(const SolverState& state, Index i, Index j);

/// Phi = phi(0) - phi(m): positive when moving to m beats setting the
/// entry to zero, negative when zero wins.  Requires det(Z(0)) > 0, i.e.
/// q0 = -Delta_ij*x_ij^2 - 2*y_ij*x_ij + 1 > 0.  No full determinant is
/// evaluated; the log det(X) terms cancel.
double threshold_gap(const SolverState& state, Index i, Index j, double m);

/// The coordinate update map: m_ii on the diagonal; off the diagonal the
/// threshold rule between 0 and m_ij, with exact ties keeping the current
/// zero/nonzero status.
double apply_map(const SolverState& state, Index i, Index j);

/// One full sweep over the diagonal plus upper triangle (row-major).
/// Returns the objective decrease (>= 0 up to round-off).
double sweep(SolverState& state, const SolverConfig& config);

/// Full solve from the diagonal start.  converged = true once the relative
/// objective change falls below config.rel_tol and the tracked stationarity
/// residual falls below config.fp_tol, before max_sweeps run out.
std::pair<Matrix, SolveReport> solve(const Matrix& S, double lambda,
                                     const SolverConfig& config = {});

/// -log det(X) + tr(S*X) + lambda*||X||_0 (exact-zero count).
/// Throws NotPositiveDefinite.
double objective(const Matrix& X, const Matrix& S, double lambda);

struct FixedPointResiduals {
  // max |y_ij - s_ij| over the diagonal and the nonzero off-diagonals,
  // with Y the fresh inverse of X
  double max_nonzero_residual = 0.0;
  // count of zero entries with s_ij = 0 whose |y_ij| exceeds
  // sqrt(2*lambda*y_ii*y_jj)
  int zero_bound_violations = 0;
};

FixedPointResiduals fixed_point_residuals(const Matrix& X, const Matrix& S,
                                          double lambda);

/// Number of nonzero entries strictly above the diagonal.
int nnz_offdiag(const Matrix& X);

/// Count of all nonzero entries (both triangles plus diagonal).
int l0_norm(const Matrix& X);

/// Recomputes Y and logdet_x from a Cholesky factorization of X.
void refresh_state(SolverState& state);

}  // namespace l0cov
