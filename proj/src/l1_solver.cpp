#include "l0cov/l1_solver.hpp"

#include <cmath>

namespace l0cov {

namespace {

double l1_norm(const Matrix& X) { return X.cwiseAbs().sum(); }

// Stationary point along an off-diagonal coordinate with effective linear
// coefficient s_eff (same cancellation-free form as the l0 solver).
double offdiag_stationary(double x_ij, double y_ii, double y_jj, double y_ij,
                          double delta_ij, double s_eff) {
  const double disc =
      std::sqrt(delta_ij * delta_ij + 4.0 * s_eff * s_eff * y_ii * y_jj);
  return x_ij + y_ij / delta_ij -
         2.0 * s_eff * y_ii * y_jj / (delta_ij * (delta_ij + disc));
}

// New value for the off-diagonal entry (i, j) under the l1 rule.
double l1_offdiag_value(const SolverState& state, Index i, Index j,
                        double mu) {
  const double x_ij = state.X(i, j);
  const double y_ii = state.Y(i, i);
  const double y_jj = state.Y(j, j);
  const double y_ij = state.Y(i, j);
  const double delta_ij = y_ii * y_jj - y_ij * y_ij;
  if (!(delta_ij > 0.0))
    throw DriftDetected("l1_offdiag_value: Schur quantity not positive");
  const double s_ij = state.S(i, j);
  const double q0 = -delta_ij * x_ij * x_ij - 2.0 * y_ij * x_ij + 1.0;

  double sign;
  if (q0 > 0.0) {
    // [Z(0)^{-1}]_ij, the inverse entry after zeroing the coordinate
    const double g0 = (delta_ij * x_ij + y_ij) / q0;
    if (std::abs(g0 - s_ij) <= mu) return 0.0;
    sign = g0 - s_ij > 0.0 ? 1.0 : -1.0;
  } else {
    // zero is outside the PD domain; the sign cannot flip across it
    sign = x_ij > 0.0 ? 1.0 : -1.0;
  }
  const double m = offdiag_stationary(x_ij, y_ii, y_jj, y_ij, delta_ij,
                                      s_ij + mu * sign);
  if (q0 > 0.0 && m * sign <= 0.0) return 0.0;  // round-off at the threshold
  return m;
}

bool update_entry_once(SolverState& state, Index i, Index j, double mu,
                       const L1Config& config) {
  const double x_old = state.X(i, j);
  double x_new;
  if (i == j) {
    const double y_ii = state.Y(i, i);
    const double s_eff = state.S(i, i) + mu;
    x_new = state.X(i, i) + (y_ii - s_eff) / (y_ii * s_eff);
  } else {
    x_new = l1_offdiag_value(state, i, j, mu);
  }
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

bool update_entry(SolverState& state, Index i, Index j, double mu,
                  const L1Config& config) {
  try {
    return update_entry_once(state, i, j, mu, config);
  } catch (const DriftDetected&) {
    refresh_state(state);
  } catch (const SingularUpdate&) {
    refresh_state(state);
  }
  return update_entry_once(state, i, j, mu, config);
}

// Stationarity residual from the maintained inverse: max of
// |y_ii - s_ii - mu| and |y_ij - s_ij - mu*sgn(x_ij)| over nonzeros.
double tracked_kkt_residual(const SolverState& state, double mu) {
  const Index p = state.X.rows();
  double residual = 0.0;
  for (Index i = 0; i < p; ++i)
    residual =
        std::max(residual, std::abs(state.Y(i, i) - state.S(i, i) - mu));
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (state.X(i, j) != 0.0) {
        const double sign = state.X(i, j) > 0.0 ? 1.0 : -1.0;
        residual = std::max(
            residual,
            std::abs(state.Y(i, j) - state.S(i, j) - mu * sign));
      }
  return residual;
}

double sweep_l1(SolverState& state, double mu, const L1Config& config) {
  const Index p = state.X.rows();
  if (!config.reverse_order) {
    for (Index i = 0; i < p; ++i)
      for (Index j = i; j < p; ++j) update_entry(state, i, j, mu, config);
  } else {
    for (Index i = p - 1; i >= 0; --i)
      for (Index j = p - 1; j >= i; --j) update_entry(state, i, j, mu, config);
  }
  const double obj = -state.logdet_x +
                     (state.S.cwiseProduct(state.X)).sum() +
                     mu * l1_norm(state.X);
  const double decrease = state.last_objective - obj;
  state.last_objective = obj;
  ++state.sweep_count;
  return decrease;
}

}  // namespace

std::pair<Matrix, SolveReport> solve_l1(const Matrix& S, double mu,
                                        const L1Config& config) {
  if (!(mu > 0.0)) throw BadParams("solve_l1: mu must be positive");
  SolverState state = init_state(S, mu);
  state.last_objective = objective_l1(state.X, state.S, mu);
  SolveReport report;
  double prev = state.last_objective;
  while (state.sweep_count < config.max_sweeps) {
    sweep_l1(state, mu, config);
    report.objective_trace.push_back(state.last_objective);
    if (config.refresh_period > 0 &&
        state.sweep_count % config.refresh_period == 0)
      refresh_state(state);
    const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
    if (std::abs(prev - state.last_objective) < config.rel_tol * denom &&
        tracked_kkt_residual(state, mu) <= config.fp_tol) {
      report.converged = true;
      break;
    }
    prev = state.last_objective;
  }
  report.sweeps_used = state.sweep_count;
  report.final_objective = state.last_objective;
  report.nnz_offdiag = nnz_offdiag(state.X);
  report.fixed_point_max_residual =
      l1_kkt_residuals(state.X, state.S, mu).max_nonzero;
  return {std::move(state.X), std::move(report)};
}

double objective_l1(const Matrix& X, const Matrix& S, double mu) {
  auto chol = cholesky(X);
  if (!chol) throw NotPositiveDefinite("objective_l1: X is not PD");
  return -chol->logdet + (S.cwiseProduct(X)).sum() + mu * l1_norm(X);
}

KktResiduals l1_kkt_residuals(const Matrix& X, const Matrix& S, double mu) {
  auto [Y, logdet] = pd_inverse_logdet(X);
  (void)logdet;
  KktResiduals out;
  const Index p = X.rows();
  for (Index i = 0; i < p; ++i)
    out.max_nonzero =
        std::max(out.max_nonzero, std::abs(Y(i, i) - S(i, i) - mu));
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      if (X(i, j) != 0.0) {
        const double sign = X(i, j) > 0.0 ? 1.0 : -1.0;
        out.max_nonzero = std::max(
            out.max_nonzero, std::abs(Y(i, j) - S(i, j) - mu * sign));
      } else {
        out.max_zero_excess =
            std::max(out.max_zero_excess, std::abs(Y(i, j) - S(i, j)) - mu);
      }  // clamped at zero by the initializer
    }
  }
  return out;
}

}  // namespace l0cov
