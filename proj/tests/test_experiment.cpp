#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "l0cov/experiment.hpp"
#include "test_support.hpp"

using namespace l0cov;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig config;
  config.p = 6;
  config.n = 12;
  config.M = 3;
  config.alpha_list = {1.0};
  config.kind = GraphKind::NonSmallWorld;
  config.grid.points = 5;
  config.master_seed = 42;
  config.out_dir = out_dir;
  // at p=6 the paper-scale fractions round below p; use workable ones
  config.sparse_frac = 0.34;  // -> 6 off-diagonal nonzeros
  config.dense_frac = 0.67;   // -> 18
  return config;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("run_experiment: smoke run emits all files") {
  const fs::path dir = fs::temp_directory_path() / "l0cov_smoke";
  fs::remove_all(dir);
  auto records = run_experiment(tiny_config(dir.string()));
  CHECK(records.size() == 6);  // 3 replicates x 2 solvers
  CHECK(fs::exists(dir / "records.csv"));
  CHECK(fs::exists(dir / "aggregate.json"));
  CHECK(fs::exists(dir / "kl_ratio_vs_alpha.csv"));
  for (const auto& rec : records) {
    CHECK(rec.ok);
    CHECK(rec.kl_oracle >= -1e-9);
    CHECK(rec.tpr >= 0.0);
    CHECK(rec.tpr <= 1.0);
    CHECK(rec.fpr >= 0.0);
    CHECK(rec.fpr <= 1.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("run_experiment: fixed master seed reproduces records.csv bytes") {
  const fs::path dir1 = fs::temp_directory_path() / "l0cov_det1";
  const fs::path dir2 = fs::temp_directory_path() / "l0cov_det2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  run_experiment(tiny_config(dir1.string()));
  run_experiment(tiny_config(dir2.string()));
  CHECK(slurp(dir1 / "records.csv") == slurp(dir2 / "records.csv"));
  CHECK(slurp(dir1 / "aggregate.json") == slurp(dir2 / "aggregate.json"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("run_experiment: aggregates identical at any parallelism") {
  const fs::path dir1 = fs::temp_directory_path() / "l0cov_par1";
  const fs::path dir2 = fs::temp_directory_path() / "l0cov_par2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  ExperimentConfig serial = tiny_config(dir1.string());
  serial.jobs = 1;
  ExperimentConfig parallel = tiny_config(dir2.string());
  parallel.jobs = 2;
  run_experiment(serial);
  run_experiment(parallel);
  CHECK(slurp(dir1 / "aggregate.json") == slurp(dir2 / "aggregate.json"));
  CHECK(slurp(dir1 / "records.csv") == slurp(dir2 / "records.csv"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("records.csv schema is pinned") {
  CHECK(records_csv_header() ==
        "replicate_id,solver,alpha,n,p,seed,lambda_oracle,kl_oracle,"
        "lambda_ebic,kl_ebic,tpr,fpr,nnz_oracle,true_nnz,"
        "mean_abs_est_amplitude,mean_abs_true_amplitude,ok");
}

TEST_CASE("make_truth: shared versus fresh policies") {
  ExperimentConfig config = tiny_config("");
  GroundTruth shared0 = make_truth(config, 0, 0);
  GroundTruth shared1 = make_truth(config, 0, 1);
  CHECK((shared0.omega - shared1.omega).norm() == 0.0);

  config.fresh_truth = true;
  GroundTruth fresh0 = make_truth(config, 0, 0);
  GroundTruth fresh1 = make_truth(config, 0, 1);
  CHECK((fresh0.omega - fresh1.omega).norm() != 0.0);
}

TEST_CASE("run_roc: empty-support truth gives TPR 1 and vanishing tail FPR") {
  ExperimentConfig config = tiny_config("");
  config.sparse_frac = 0.0;  // diagonal truth
  config.n = 48;
  config.M = 2;
  config.grid.points = 8;
  const auto table = run_roc(config);
  REQUIRE(table.size() == 16);
  double l1_prev_fpr = 1.0;
  for (const auto& row : table) {
    CHECK(row.tpr_mean == 1.0);
    if (row.solver == SolverKind::L1) {
      // decreasing up to one-flip averaging noise (1 pair / 15 / M)
      CHECK(row.fpr_mean <= l1_prev_fpr + 1.0 / 15.0 / 2.0 + 1e-12);
      l1_prev_fpr = row.fpr_mean;
    }
  }
  // at the top of the grid both solvers return diagonal estimates
  CHECK(table.front().solver == SolverKind::L0);
  CHECK(table[table.size() / 2 - 1].fpr_mean == 0.0);  // last l0 grid point
  CHECK(table.back().fpr_mean == 0.0);                 // last l1 grid point
}

TEST_CASE("run_roc: writes the pinned csv schema") {
  const fs::path dir = fs::temp_directory_path() / "l0cov_roc";
  fs::remove_all(dir);
  ExperimentConfig config = tiny_config(dir.string());
  config.M = 2;
  run_roc(config);
  std::ifstream is(dir / "roc.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "lambda,tpr_mean,fpr_mean,solver");
  fs::remove_all(dir);
}

TEST_CASE("amplitude_report: identity and zero estimates") {
  RunRecord est_is_truth;
  est_is_truth.ok = true;
  est_is_truth.solver = SolverKind::L0;
  est_is_truth.mean_abs_est_amplitude = 0.7;
  est_is_truth.mean_abs_true_amplitude = 0.7;
  RunRecord est_zero;
  est_zero.ok = true;
  est_zero.solver = SolverKind::L1;
  est_zero.mean_abs_est_amplitude = 0.0;
  est_zero.mean_abs_true_amplitude = 0.7;
  const auto rows = amplitude_report({est_is_truth, est_zero});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].shrinkage_ratio == doctest::Approx(1.0));
  CHECK(rows[1].shrinkage_ratio == doctest::Approx(0.0));
}

TEST_CASE("run_ensemble: rejects invalid configurations") {
  ExperimentConfig config = tiny_config("");
  config.M = 0;
  CHECK_THROWS_AS(run_ensemble(config), BadParams);
  config = tiny_config("");
  config.alpha_list = {1.5};
  CHECK_THROWS_AS(run_ensemble(config), BadParams);
  config = tiny_config("");
  config.run_l0 = config.run_l1 = false;
  CHECK_THROWS_AS(run_ensemble(config), BadParams);
}
