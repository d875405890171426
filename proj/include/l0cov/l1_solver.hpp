#pragma once

// Coordinate-descent baseline for the l1-penalized log-likelihood
//
//   -log det(X) + tr(S*X) + mu*||X||_1,   ||X||_1 = sum_ij |x_ij|,
//
// sharing the determinant-ratio / inverse-update machinery with the l0
// solver.  Per coordinate: the diagonal minimizer is the l0 diagonal rule
// with s_ii replaced by s_ii + mu (x_ii > 0 on any PD iterate); an
// off-diagonal entry is soft-thresholded to exact zero when
// |[Z(0)^{-1}]_ij - s_ij| <= mu, and otherwise solves the stationarity
// condition with s_ij replaced by s_ij + mu*sgn(x) for the consistent sign.
// The objective is convex, so the sweep order only affects the path, not
// the limit.

#include <utility>

#include "l0cov/l0_solver.hpp"
#include "l0cov/types.hpp"

namespace l0cov {

struct L1Config {
  double rel_tol = 1e-8;
  int max_sweeps = 500;
  int refresh_period = 10;
  double denom_floor = 1e-12;
  // stationarity polish (see SolverConfig::fp_tol): convergence also
  // requires the tracked KKT residual to fall below this
  double fp_tol = 8e-7;
  // visit the upper triangle in reverse row-major order (used to confirm
  // order independence of the convex problem)
  bool reverse_order = false;
};

/// Full l1 solve from the diagonal start X = diag(1/s_ii).  The report's
/// fixed_point_max_residual carries the stationarity residual
/// max |y_ij - s_ij - mu*sgn(x_ij)| over diagonal and nonzero entries.
std::pair<Matrix, SolveReport> solve_l1(const Matrix& S, double mu,
                                        const L1Config& config = {});

/// -log det(X) + tr(S*X) + mu*||X||_1.  Throws NotPositiveDefinite.
double objective_l1(const Matrix& X, const Matrix& S, double mu);

struct KktResiduals {
  // max |y_ii - s_ii - mu| over the diagonal and
  // max |y_ij - s_ij - mu*sgn(x_ij)| over nonzero off-diagonals
  double max_nonzero = 0.0;
  // max over zero off-diagonals of |y_ij - s_ij| - mu, clamped at zero;
  // positive iff some zero entry violates the subgradient bound
  double max_zero_excess = 0.0;
};

/// Stationarity residuals of X for the l1 problem, with Y the fresh
/// inverse of X.
KktResiduals l1_kkt_residuals(const Matrix& X, const Matrix& S, double mu);

}  // namespace l0cov
