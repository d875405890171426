#pragma once

// Estimator quality metrics, lambda-path sweeps and model selection.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "l0cov/l0_solver.hpp"
#include "l0cov/model_gen.hpp"
#include "l0cov/types.hpp"

namespace l0cov {

enum class SolverKind { L0, L1 };

std::string solver_name(SolverKind kind);  // "l0" / "l1"

/// Gaussian KL divergence -log det(Sigma*Omega) + tr(Sigma*Omega) - p;
/// nonnegative, zero iff omega_hat inverts sigma_true.
double kl_divergence(const Matrix& omega_hat, const Matrix& sigma_true);

/// Extended BIC with k = number of nonzero off-diagonal entries (i < j):
///   n*(-log det(Omega) + tr(S*Omega)) + k*log(n) + 4*k*gamma*log(p).
double ebic(const Matrix& omega_hat, const Matrix& S, int n, double gamma);

/// (TPR, FPR) over off-diagonal pairs i < j against the true support.
/// TPR is 1 when the true support is empty; FPR is 0 when there are no
/// non-edges.
std::pair<double, double> support_metrics(const Matrix& omega_hat,
                                          const GroundTruth& truth);

struct PathRecord {
  double lambda = 0.0;
  Matrix estimate;          // empty when the solve threw
  double kl = 0.0;          // NaN until annotated
  double ebic_value = 0.0;  // NaN until annotated
  int nnz = 0;              // off-diagonal nonzeros (i < j)
  bool converged = false;
  bool solved = false;  // false when the solver threw for this lambda
  SolveReport report;
};

struct LambdaPath {
  std::vector<double> grid;  // strictly increasing
  std::vector<PathRecord> records;
};

/// One solve per grid point, each from the diagonal initialization.
/// Solver errors mark the record unsolved instead of aborting the path.
/// For the l1 solver, config's rel_tol/max_sweeps/refresh_period carry over.
LambdaPath lambda_sweep(const Matrix& S, const std::vector<double>& grid,
                        SolverKind kind, const SolverConfig& config = {});

void annotate_kl(LambdaPath& path, const Matrix& sigma_true);
void annotate_ebic(LambdaPath& path, const Matrix& S, int n, double gamma);

/// Grid point minimizing KL divergence; ties break toward smaller lambda.
/// Annotates KL as a side effect.  Returns (lambda, kl).
std::pair<double, double> oracle_select(LambdaPath& path,
                                        const Matrix& sigma_true);

/// Grid point minimizing EBIC; returns (lambda, kl at that point).
/// Annotates both EBIC and KL.
std::pair<double, double> ebic_select(LambdaPath& path, const Matrix& S,
                                      int n, double gamma,
                                      const Matrix& sigma_true);

/// Largest first-move crossover penalty from the diagonal initialization:
/// above this value the first sweep keeps every off-diagonal entry at zero.
double lambda_bar(const Matrix& S);

std::vector<double> linear_grid(double lo, double hi, int points);

/// Default grid: points linearly spaced on [0.01, 1.2] * lambda_bar(S).
std::vector<double> default_lambda_grid(const Matrix& S, int points);

/// Grid for support-recovery sweeps: same floor, but the top is raised to
/// 1.05 * max |s_ij| so the soft-thresholding solver also reaches a fully
/// diagonal estimate (its kill point sits near |s_ij|, far above the hard
/// threshold's crossover).
std::vector<double> support_sweep_grid(const Matrix& S, int points);

struct MetricStats {
  double mean = 0.0;
  double se = 0.0;  // sample SD / sqrt(count); 0 when count == 1
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

MetricStats summarize(const std::vector<double>& values);

/// One Monte-Carlo replicate of the simulation procedure for one solver.
struct RunRecord {
  int replicate_id = 0;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  int n = 0;
  int p = 0;
  SolverKind solver = SolverKind::L0;
  double lambda_oracle = 0.0;
  double kl_oracle = 0.0;
  double lambda_ebic = 0.0;
  double kl_ebic = 0.0;
  double tpr = 0.0;  // at the oracle selection
  double fpr = 0.0;
  int nnz_oracle = 0;
  int true_nnz = 0;
  double mean_abs_est_amplitude = 0.0;   // |estimate| over the true support
  double mean_abs_true_amplitude = 0.0;  // |truth| over the true support
  bool ok = false;
};

/// Per-metric mean/SE/min/max over a homogeneous group of records.
std::map<std::string, MetricStats> aggregate(const std::vector<RunRecord>& records);

/// mean(kl over numer) / mean(kl over denom); ebic_flavor selects kl_ebic.
double kl_ratio_of_means(const std::vector<RunRecord>& numer,
                         const std::vector<RunRecord>& denom,
                         bool ebic_flavor = false);

}  // namespace l0cov
