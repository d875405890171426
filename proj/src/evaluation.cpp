#include "l0cov/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "l0cov/l1_solver.hpp"

namespace l0cov {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string solver_name(SolverKind kind) {
  return kind == SolverKind::L0 ? "l0" : "l1";
}

double kl_divergence(const Matrix& omega_hat, const Matrix& sigma_true) {
  auto chol_omega = cholesky(omega_hat);
  if (!chol_omega) throw NotPositiveDefinite("kl_divergence: estimate not PD");
  auto chol_sigma = cholesky(sigma_true);
  if (!chol_sigma) throw NotPositiveDefinite("kl_divergence: sigma not PD");
  const double p = static_cast<double>(omega_hat.rows());
  const double trace = (sigma_true.cwiseProduct(omega_hat)).sum();
  return -(chol_sigma->logdet + chol_omega->logdet) + trace - p;
}

double ebic(const Matrix& omega_hat, const Matrix& S, int n, double gamma) {
  if (n < 1) throw BadParams("ebic: n must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw BadParams("ebic: gamma must be in [0, 1]");
  auto chol = cholesky(omega_hat);
  if (!chol) throw NotPositiveDefinite("ebic: estimate not PD");
  const double fit = -chol->logdet + (S.cwiseProduct(omega_hat)).sum();
  const double k = static_cast<double>(nnz_offdiag(omega_hat));
  const double p = static_cast<double>(omega_hat.rows());
  return n * fit + k * std::log(static_cast<double>(n)) +
         4.0 * k * gamma * std::log(p);
}

std::pair<double, double> support_metrics(const Matrix& omega_hat,
                                          const GroundTruth& truth) {
  const Index p = omega_hat.rows();
  if (truth.omega.rows() != p)
    throw BadParams("support_metrics: dimension mismatch");
  std::vector<char> is_true(static_cast<std::size_t>(p * p), 0);
  for (auto [i, j] : truth.support) is_true[i * p + j] = 1;
  long hits = 0, false_alarms = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (omega_hat(i, j) != 0.0) {
        if (is_true[i * p + j])
          ++hits;
        else
          ++false_alarms;
      }
  const long n_true = static_cast<long>(truth.support.size());
  const long n_non = p * (p - 1) / 2 - n_true;
  const double tpr =
      n_true > 0 ? static_cast<double>(hits) / n_true : 1.0;
  const double fpr =
      n_non > 0 ? static_cast<double>(false_alarms) / n_non : 0.0;
  return {tpr, fpr};
}

LambdaPath lambda_sweep(const Matrix& S, const std::vector<double>& grid,
                        SolverKind kind, const SolverConfig& config) {
  if (grid.empty()) throw BadParams("lambda_sweep: empty grid");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      throw BadParams("lambda_sweep: grid must be strictly increasing");
  LambdaPath path;
  path.grid = grid;
  path.records.reserve(grid.size());
  for (double lam : grid) {
    PathRecord rec;
    rec.lambda = lam;
    rec.kl = kNaN;
    rec.ebic_value = kNaN;
    try {
      if (kind == SolverKind::L0) {
        auto [est, report] = solve(S, lam, config);
        rec.estimate = std::move(est);
        rec.report = std::move(report);
      } else {
        L1Config l1;
        l1.rel_tol = config.rel_tol;
        l1.max_sweeps = config.max_sweeps;
        l1.refresh_period = config.refresh_period;
        l1.denom_floor = config.denom_floor;
        auto [est, report] = solve_l1(S, lam, l1);
        rec.estimate = std::move(est);
        rec.report = std::move(report);
      }
      rec.solved = true;
      rec.converged = rec.report.converged;
      rec.nnz = rec.report.nnz_offdiag;
    } catch (const std::runtime_error&) {
      rec.solved = false;
      rec.converged = false;
    }
    path.records.push_back(std::move(rec));
  }
  return path;
}

void annotate_kl(LambdaPath& path, const Matrix& sigma_true) {
  for (auto& rec : path.records) {
    if (!rec.solved) continue;
    if (std::isnan(rec.kl)) rec.kl = kl_divergence(rec.estimate, sigma_true);
  }
}

void annotate_ebic(LambdaPath& path, const Matrix& S, int n, double gamma) {
  for (auto& rec : path.records) {
    if (!rec.solved) continue;
    if (std::isnan(rec.ebic_value))
      rec.ebic_value = ebic(rec.estimate, S, n, gamma);
  }
}

namespace {

// Index of the strictly smallest value among solved records; ties keep the
// earlier (smaller-lambda) entry.  Returns -1 if nothing is solved.
template <typename Getter>
std::ptrdiff_t argmin_solved(const LambdaPath& path, Getter get) {
  std::ptrdiff_t best = -1;
  double best_val = 0.0;
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(path.records.size()); ++k) {
    const auto& rec = path.records[k];
    if (!rec.solved || std::isnan(get(rec))) continue;
    if (best < 0 || get(rec) < best_val) {
      best = k;
      best_val = get(rec);
    }
  }
  return best;
}

}  // namespace

std::pair<double, double> oracle_select(LambdaPath& path,
                                        const Matrix& sigma_true) {
  annotate_kl(path, sigma_true);
  const auto best =
      argmin_solved(path, [](const PathRecord& r) { return r.kl; });
  if (best < 0) throw BadParams("oracle_select: no solved record in path");
  return {path.records[best].lambda, path.records[best].kl};
}

std::pair<double, double> ebic_select(LambdaPath& path, const Matrix& S,
                                      int n, double gamma,
                                      const Matrix& sigma_true) {
  annotate_ebic(path, S, n, gamma);
  annotate_kl(path, sigma_true);
  const auto best =
      argmin_solved(path, [](const PathRecord& r) { return r.ebic_value; });
  if (best < 0) throw BadParams("ebic_select: no solved record in path");
  return {path.records[best].lambda, path.records[best].kl};
}

double lambda_bar(const Matrix& S) {
  const Index p = S.rows();
  double best = 0.0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      const double s = S(i, j);
      if (s == 0.0) continue;
      // at the diagonal start: y_ii = s_ii, y_ij = 0, Delta = s_ii*s_jj
      const double delta_ij = S(i, i) * S(j, j);
      const double disc = std::sqrt(delta_ij * delta_ij + 4.0 * s * s * delta_ij);
      const double m = -2.0 * s * delta_ij / (delta_ij * (delta_ij + disc));
      const double q_m = -delta_ij * m * m + 1.0;
      const double crossover = 0.5 * (std::log(q_m) - 2.0 * s * m);
      best = std::max(best, crossover);
    }
  }
  return best;
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1) throw BadParams("linear_grid: points must be positive");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw BadParams("linear_grid: hi must exceed lo");
  std::vector<double> grid(points);
  const double step = (hi - lo) / (points - 1);
  for (int k = 0; k < points; ++k) grid[k] = lo + step * k;
  grid.back() = hi;
  return grid;
}

std::vector<double> default_lambda_grid(const Matrix& S, int points) {
  double bar = lambda_bar(S);
  if (!(bar > 0.0)) bar = 1.0;  // diagonal S: any positive scale works
  return linear_grid(0.01 * bar, 1.2 * bar, points);
}

std::vector<double> support_sweep_grid(const Matrix& S, int points) {
  double bar = lambda_bar(S);
  if (!(bar > 0.0)) bar = 1.0;
  double s_max = 0.0;
  for (Index i = 0; i < S.rows(); ++i)
    for (Index j = i + 1; j < S.cols(); ++j)
      s_max = std::max(s_max, std::abs(S(i, j)));
  const double hi = std::max(1.2 * bar, 1.05 * s_max);
  return linear_grid(0.01 * bar, hi, points);
}

MetricStats summarize(const std::vector<double>& values) {
  MetricStats stats;
  stats.count = static_cast<int>(values.size());
  if (values.empty()) return stats;
  stats.min = values[0];
  stats.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    stats.min = std::min(stats.min, v);
    stats.max = std::max(stats.max, v);
  }
  stats.mean = sum / stats.count;
  if (stats.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.se = std::sqrt(ss / (stats.count - 1)) / std::sqrt(stats.count);
  }
  return stats;
}

std::map<std::string, MetricStats> aggregate(
    const std::vector<RunRecord>& records) {
  if (records.empty()) throw BadParams("aggregate: no records");
  std::map<std::string, std::vector<double>> columns;
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    columns["kl_oracle"].push_back(rec.kl_oracle);
    columns["kl_ebic"].push_back(rec.kl_ebic);
    columns["lambda_oracle"].push_back(rec.lambda_oracle);
    columns["lambda_ebic"].push_back(rec.lambda_ebic);
    columns["tpr"].push_back(rec.tpr);
    columns["fpr"].push_back(rec.fpr);
    columns["nnz_oracle"].push_back(static_cast<double>(rec.nnz_oracle));
    columns["mean_abs_est_amplitude"].push_back(rec.mean_abs_est_amplitude);
    columns["mean_abs_true_amplitude"].push_back(rec.mean_abs_true_amplitude);
  }
  std::map<std::string, MetricStats> out;
  for (auto& [name, vals] : columns) out[name] = summarize(vals);
  return out;
}

double kl_ratio_of_means(const std::vector<RunRecord>& numer,
                         const std::vector<RunRecord>& denom,
                         bool ebic_flavor) {
  auto mean_kl = [ebic_flavor](const std::vector<RunRecord>& recs) {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : recs) {
      if (!r.ok) continue;
      sum += ebic_flavor ? r.kl_ebic : r.kl_oracle;
      ++count;
    }
    if (count == 0) throw BadParams("kl_ratio_of_means: no usable records");
    return sum / count;
  };
  return mean_kl(numer) / mean_kl(denom);
}

}  // namespace l0cov
