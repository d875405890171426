#pragma once

// Orchestration of the full simulation protocol: generate a ground truth
// per sparsity level, draw replicates, sweep the penalty grid with both
// solvers, select by oracle KL and by EBIC, and emit plot-ready tables.
//
// Seeding: the replicate seed is combine_seed(master_seed, alpha_index,
// replicate_index); data and fresh-truth streams are derived from it with
// fixed salts, so any record can be reproduced in isolation and aggregates
// do not depend on scheduling.

#include <cstdint>
#include <string>
#include <vector>

#include "l0cov/evaluation.hpp"
#include "l0cov/model_gen.hpp"
#include "l0cov/types.hpp"

namespace l0cov {

struct GridSpec {
  int points = 40;
  // both zero: derive [0.01, 1.2] * lambda_bar from each replicate's S
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  // derive the automatic grid once, from replicate 0's sample covariance,
  // and share it across replicates (required for ROC averaging)
  bool shared = false;
  // raise the automatic grid's top to the soft-threshold kill range so both
  // solvers sweep from dense to fully diagonal (run_roc turns this on)
  bool support_range = false;
};

struct ExperimentConfig {
  int p = 100;
  int n = 70;
  int M = 15;  // replicates per sparsity level
  std::vector<double> alpha_list = {1.0};
  GraphKind kind = GraphKind::NonSmallWorld;
  bool run_l0 = true;
  bool run_l1 = true;
  GridSpec grid;
  std::uint64_t master_seed = 1;
  double gamma = 0.5;
  std::string out_dir;  // empty: keep results in memory only
  int jobs = 1;
  // one truth per sparsity level when false; an independent truth per
  // replicate when true (ensemble studies)
  bool fresh_truth = false;
  double sparse_frac = 0.015;  // ||Omega(1)||_0 / p^2, diagonal included
  double dense_frac = 0.22;    // ||Omega(0)||_0 / p^2
  SolverConfig solver;
  double fail_limit = 0.10;  // abort when more than this fraction fails
};

struct RocPoint {
  double lambda = 0.0;
  double tpr_mean = 0.0;
  double fpr_mean = 0.0;
  SolverKind solver = SolverKind::L0;
};

struct ReplicateOutcome {
  RunRecord l0;
  RunRecord l1;
  // per grid point, in grid order
  std::vector<std::pair<double, double>> tprfpr_l0;
  std::vector<std::pair<double, double>> tprfpr_l1;
  bool failed = false;
  std::string error;
};

struct AlphaResult {
  double alpha = 1.0;
  std::vector<double> grid;  // replicate 0's grid (the shared one if enabled)
  std::vector<ReplicateOutcome> outcomes;
};

struct EnsembleResult {
  std::vector<AlphaResult> per_alpha;
};

/// Runs every (alpha, replicate) cell.  Throws when the failed fraction
/// exceeds config.fail_limit.
EnsembleResult run_ensemble(const ExperimentConfig& config);

/// The truth used for (alpha, replicate) under the config's seeding policy.
GroundTruth make_truth(const ExperimentConfig& config, int alpha_index,
                       int replicate);

/// Ensemble run plus records.csv, aggregate.json and kl_ratio_vs_alpha.csv
/// under config.out_dir (when set).  Returns the flattened records.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      EnsembleResult* ensemble_out);

/// Per-lambda TPR/FPR averages over replicates (forces a shared grid);
/// writes roc.csv (single alpha) under config.out_dir when set.
std::vector<RocPoint> run_roc(const ExperimentConfig& config);
std::vector<RocPoint> roc_from_ensemble(const EnsembleResult& ensemble,
                                        const ExperimentConfig& config);

struct AmplitudeRow {
  SolverKind solver = SolverKind::L0;
  double mean_abs_est = 0.0;
  double mean_abs_truth = 0.0;
  double shrinkage_ratio = 0.0;  // mean_abs_est / mean_abs_truth
};

/// Shrinkage summary over true-support amplitudes, one row per solver.
std::vector<AmplitudeRow> amplitude_report(const std::vector<RunRecord>& records);

/// Pinned records.csv column list (schema stability is tested).
std::string records_csv_header();

void write_records_csv(const std::string& path,
                       const std::vector<RunRecord>& records);
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& table);

}  // namespace l0cov
