#include "l0cov/l0_solver.hpp"

#include <cmath>
#include <limits>

namespace l0cov {

namespace {
constexpr double kSymmetryTol = 1e-9;
}

SolverState init_state(const Matrix& S, double lambda) {
  if (S.rows() != S.cols() || S.rows() < 1)
    throw BadCovariance("init_state: S must be square");
  if (!is_symmetric(S, kSymmetryTol))
    throw BadCovariance("init_state: S asymmetric beyond 1e-9");
  if (!(lambda > 0.0)) throw BadParams("init_state: lambda must be positive");

  const Index p = S.rows();
  SolverState state;
  state.S = S;
  symmetrize_average(state.S);
  state.lambda = lambda;
  state.X = Matrix::Zero(p, p);
  state.Y = Matrix::Zero(p, p);
  state.logdet_x = 0.0;
  for (Index i = 0; i < p; ++i) {
    const double s_ii = state.S(i, i);
    if (!(s_ii > 0.0))
      throw BadCovariance("init_state: s_ii <= 0 at index " + std::to_string(i));
    state.X(i, i) = 1.0 / s_ii;
    state.Y(i, i) = s_ii;
    state.logdet_x -= std::log(s_ii);
  }
  state.sweep_count = 0;
  state.last_objective = objective(state.X, state.S, lambda);
  return state;
}

double minimizer_diag(const SolverState& state, Index i) {
  const double y_ii = state.Y(i, i);
  const double s_ii = state.S(i, i);
  return state.X(i, i) + (y_ii - s_ii) / (y_ii * s_ii);
}

namespace {

// Stationary point of -log det(Z(x)) + 2*s*x along the off-diagonal
// coordinate, written so the small-s limit is cancellation free:
//   m = x_ij + y_ij/Delta - 2*s*y_ii*y_jj / (Delta*(Delta + sqrt(D)))
// with D = Delta^2 + 4*s^2*y_ii*y_jj.  At s = 0 the last term vanishes and
// the expression reduces to x_ij + y_ij/Delta.
double offdiag_stationary(double x_ij, double y_ii, double y_jj, double y_ij,
                          double delta_ij, double s) {
  const double disc =
      std::sqrt(delta_ij * delta_ij + 4.0 * s * s * y_ii * y_jj);
  return x_ij + y_ij / delta_ij -
         2.0 * s * y_ii * y_jj / (delta_ij * (delta_ij + disc));
}

}  // namespace

double minimizer_offdiag(const SolverState& state, Index i, Index j) {
  const double y_ii = state.Y(i, i);
  const double y_jj = state.Y(j, j);
  const double y_ij = state.Y(i, j);
  const double delta_ij = y_ii * y_jj - y_ij * y_ij;
  if (!(delta_ij > 0.0))
    throw DriftDetected("minimizer_offdiag: Schur quantity not positive");
  return offdiag_stationary(state.X(i, j), y_ii, y_jj, y_ij, delta_ij,
                            state.S(i, j));
}

double threshold_gap(const SolverState& state, Index i, Index j, double m) {
  const double x_ij = state.X(i, j);
  const double y_ii = state.Y(i, i);
  const double y_jj = state.Y(j, j);
  const double y_ij = state.Y(i, j);
  const double delta_ij = y_ii * y_jj - y_ij * y_ij;
  const double s_ij = state.S(i, j);
  // q0 = det(Z(0))/det(X); the precondition q0 > 0 holds on the caller's
  // branch, and is exactly 1 when x_ij == 0.
  const double q0 = -delta_ij * x_ij * x_ij - 2.0 * y_ij * x_ij + 1.0;
  const double d = m - x_ij;
  const double q_m = -delta_ij * d * d + 2.0 * y_ij * d + 1.0;
  return -std::log(q0) + std::log(q_m) - 2.0 * s_ij * m - 2.0 * state.lambda;
}

double apply_map(const SolverState& state, Index i, Index j) {
  if (i == j) return minimizer_diag(state, i);
  const double m = minimizer_offdiag(state, i, j);
  const double x_ij = state.X(i, j);
  const double y_ij = state.Y(i, j);
  const double delta_ij = schur_delta(state.Y, i, j);
  const double q0 = -delta_ij * x_ij * x_ij - 2.0 * y_ij * x_ij + 1.0;
  if (q0 <= 0.0) return m;  // zero is outside the PD domain
  const double gap = threshold_gap(state, i, j, m);
  if (gap < 0.0) return 0.0;
  if (gap > 0.0) return m;
  return x_ij != 0.0 ? m : 0.0;  // exact tie keeps the current status
}

namespace {

// Applies the map at (i, j) and performs the paired X/Y/logdet update.
// Entries that keep an exact zero are skipped without touching Y.
// Returns true if the entry changed.
bool update_entry_once(SolverState& state, Index i, Index j,
                       const SolverConfig& config) {
  const double x_old = state.X(i, j);
  const double x_new = apply_map(state, i, j);
  if (x_new == x_old) return false;
  const double d = x_new - x_old;
  if (i == j) {
    const double ratio = det_ratio_diag(state.Y, i, d);
    smw_update_diag_inplace(state.Y, i, d, config.denom_floor);
    state.X(i, i) = x_new;
    state.logdet_x += std::log(ratio);
  } else {
    const double ratio = det_ratio_offdiag(state.Y, i, j, d);
    smw_update_offdiag_inplace(state.Y, i, j, d, config.denom_floor);
    state.X(i, j) = x_new;
    state.X(j, i) = x_new;
    state.logdet_x += std::log(ratio);
  }
  return true;
}

// Drift in the incremental inverse triggers one full refresh and a retry;
// a second failure on a freshly inverted state is fatal.
bool update_entry(SolverState& state, Index i, Index j,
                  const SolverConfig& config) {
  try {
    return update_entry_once(state, i, j, config);
  } catch (const DriftDetected&) {
    refresh_state(state);
  } catch (const SingularUpdate&) {
    refresh_state(state);
  }
  return update_entry_once(state, i, j, config);
}

double sweep_impl(SolverState& state, const SolverConfig& config,
                  bool active_only) {
  const Index p = state.X.rows();
  for (Index i = 0; i < p; ++i) {
    update_entry(state, i, i, config);
    for (Index j = i + 1; j < p; ++j) {
      if (active_only && state.X(i, j) == 0.0) continue;
      update_entry(state, i, j, config);
    }
  }
  const double obj = -state.logdet_x +
                     (state.S.cwiseProduct(state.X)).sum() +
                     state.lambda * l0_norm(state.X);
  const double decrease = state.last_objective - obj;
  state.last_objective = obj;
  ++state.sweep_count;
  return decrease;
}

}  // namespace

double sweep(SolverState& state, const SolverConfig& config) {
  return sweep_impl(state, config, /*active_only=*/false);
}

namespace {

// Stationarity residual from the maintained inverse: max |y_ij - s_ij|
// over the diagonal and the nonzero off-diagonals.
double tracked_residual(const SolverState& state) {
  const Index p = state.X.rows();
  double residual = 0.0;
  for (Index i = 0; i < p; ++i)
    residual = std::max(residual, std::abs(state.Y(i, i) - state.S(i, i)));
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (state.X(i, j) != 0.0)
        residual =
            std::max(residual, std::abs(state.Y(i, j) - state.S(i, j)));
  return residual;
}

}  // namespace

void refresh_state(SolverState& state) {
  auto [inv, logdet] = pd_inverse_logdet(state.X);
  state.Y = std::move(inv);
  state.logdet_x = logdet;
}

std::pair<Matrix, SolveReport> solve(const Matrix& S, double lambda,
                                     const SolverConfig& config) {
  SolverState state = init_state(S, lambda);
  SolveReport report;
  report.objective_trace.reserve(16);
  double prev = state.last_objective;
  while (state.sweep_count < config.max_sweeps) {
    // with the speedup enabled, every 5th sweep stays full so zero entries
    // may re-enter; only a full sweep can certify convergence
    const bool active_only = config.active_set_only_after >= 0 &&
                             state.sweep_count >= config.active_set_only_after &&
                             (state.sweep_count + 1) % 5 != 0;
    sweep_impl(state, config, active_only);
    report.objective_trace.push_back(state.last_objective);
    if (config.refresh_period > 0 &&
        state.sweep_count % config.refresh_period == 0)
      refresh_state(state);
    const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
    if (!active_only &&
        std::abs(prev - state.last_objective) < config.rel_tol * denom &&
        tracked_residual(state) <= config.fp_tol) {
      report.converged = true;
      break;
    }
    prev = state.last_objective;
  }
  report.sweeps_used = state.sweep_count;
  report.final_objective = state.last_objective;
  report.nnz_offdiag = nnz_offdiag(state.X);
  report.fixed_point_max_residual =
      fixed_point_residuals(state.X, state.S, lambda).max_nonzero_residual;
  return {std::move(state.X), std::move(report)};
}

double objective(const Matrix& X, const Matrix& S, double lambda) {
  auto chol = cholesky(X);
  if (!chol) throw NotPositiveDefinite("objective: X is not PD");
  return -chol->logdet + (S.cwiseProduct(X)).sum() + lambda * l0_norm(X);
}

FixedPointResiduals fixed_point_residuals(const Matrix& X, const Matrix& S,
                                          double lambda) {
  auto [Y, logdet] = pd_inverse_logdet(X);
  (void)logdet;
  FixedPointResiduals out;
  const Index p = X.rows();
  for (Index i = 0; i < p; ++i)
    out.max_nonzero_residual =
        std::max(out.max_nonzero_residual, std::abs(Y(i, i) - S(i, i)));
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      if (X(i, j) != 0.0) {
        out.max_nonzero_residual =
            std::max(out.max_nonzero_residual, std::abs(Y(i, j) - S(i, j)));
      } else if (S(i, j) == 0.0) {
        const double bound = std::sqrt(2.0 * lambda * Y(i, i) * Y(j, j));
        // tiny slack for round-off only
        if (std::abs(Y(i, j)) > bound * (1.0 + 1e-9) + 1e-12)
          ++out.zero_bound_violations;
      }
    }
  }
  return out;
}

int nnz_offdiag(const Matrix& X) {
  int count = 0;
  const Index p = X.rows();
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (X(i, j) != 0.0) ++count;
  return count;
}

int l0_norm(const Matrix& X) {
  int count = 0;
  for (Index i = 0; i < X.rows(); ++i)
    if (X(i, i) != 0.0) ++count;
  return count + 2 * nnz_offdiag(X);
}

}  // namespace l0cov
