#pragma once

// Shared generators and independent numeric oracles for the test suites.
// Oracles go through Eigen's generic determinant/inverse, never through
// the closed-form update formulas they are meant to check.

#include <cmath>
#include <utility>

#include "l0cov/l0_solver.hpp"
#include "l0cov/perturb.hpp"
#include "l0cov/rng.hpp"
#include "l0cov/types.hpp"

namespace testsupport {

using l0cov::Index;
using l0cov::Matrix;
using l0cov::Rng;
using l0cov::Vector;

// Wishart-style PD matrix: G*G^T/p + boost*I with standard normal G,
// exactly symmetric.
inline Matrix random_pd(Rng& rng, int p, double diag_boost = 0.5) {
  Matrix g(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) g(i, j) = rng.normal();
  Matrix m = Matrix::Zero(p, p);
  m.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0 / p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) m(i, j) = m(j, i);
  m.diagonal().array() += diag_boost;
  return m;
}

// PD matrix with strong off-diagonal correlations (few underlying factors),
// useful for driving the zeroed-entry determinant q0 negative.
inline Matrix random_correlated_pd(Rng& rng, int p) {
  const int rank = 1 + static_cast<int>(rng.uniform_below(2));
  Matrix g(p, rank);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = rng.normal();
  Matrix m = Matrix::Zero(p, p);
  m.selfadjointView<Eigen::Lower>().rankUpdate(g, 1.0);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) m(i, j) = m(j, i);
  m.diagonal().array() += 0.05;
  return m;
}

// Sample covariance of n standard-normal-ish draws; PD almost surely
// when n >= p.
inline Matrix random_cov(Rng& rng, int p, int n) {
  Matrix data(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) data(i, j) = rng.normal();
  Matrix s = Matrix::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(data.transpose(), 1.0 / n);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) s(i, j) = s(j, i);
  return s;
}

// Solver state around an arbitrary PD iterate (not necessarily one the
// solver would reach on its own).
inline l0cov::SolverState make_state(Matrix X, Matrix S, double lambda) {
  l0cov::SolverState state;
  auto [Y, logdet] = l0cov::pd_inverse_logdet(X);
  state.X = std::move(X);
  state.Y = std::move(Y);
  state.logdet_x = logdet;
  l0cov::symmetrize_average(S);
  state.S = std::move(S);
  state.lambda = lambda;
  state.last_objective = l0cov::objective(state.X, state.S, lambda);
  return state;
}

// Perturbation X + delta*e_i*e_i^T as an explicit matrix.
inline Matrix perturbed_diag(const Matrix& X, Index i, double delta) {
  Matrix out = X;
  out(i, i) += delta;
  return out;
}

// Perturbation X + delta*(e_i*e_j^T + e_j*e_i^T) as an explicit matrix.
inline Matrix perturbed_offdiag(const Matrix& X, Index i, Index j,
                                double delta) {
  Matrix out = X;
  out(i, j) += delta;
  out(j, i) += delta;
  return out;
}

// delta with 1 + delta*y_ii safely positive.
inline double admissible_diag_delta(Rng& rng, const Matrix& Y, Index i) {
  const double lo = -0.9 / Y(i, i);
  return lo + rng.uniform() * (2.0 - lo);
}

// delta keeping the off-diagonal determinant ratio clearly positive.
inline double admissible_offdiag_delta(Rng& rng, const Matrix& Y, Index i,
                                       Index j) {
  for (;;) {
    const double d = 2.0 * rng.normal() / std::sqrt(l0cov::schur_delta(Y, i, j) +
                                                    Y(i, j) * Y(i, j) + 1.0);
    if (l0cov::det_ratio_offdiag(Y, i, j, d) > 1e-3) return d;
  }
}

inline bool bitwise_symmetric(const Matrix& M) {
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = i + 1; j < M.cols(); ++j)
      if (M(i, j) != M(j, i)) return false;
  return true;
}

}  // namespace testsupport
