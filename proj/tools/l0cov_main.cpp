// Command-line front end: ground-truth generation, single solves,
// lambda-path sweeps, the replicated experiment, and ROC tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "l0cov/evaluation.hpp"
#include "l0cov/experiment.hpp"
#include "l0cov/l1_solver.hpp"
#include "l0cov/matrix_io.hpp"
#include "l0cov/model_gen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

l0cov::GraphKind parse_kind(const std::string& kind) {
  if (kind == "nsw") return l0cov::GraphKind::NonSmallWorld;
  if (kind == "sw") return l0cov::GraphKind::SmallWorld;
  throw CLI::ValidationError("--kind must be nsw or sw");
}

json report_to_json(const l0cov::SolveReport& report) {
  return json{{"sweeps_used", report.sweeps_used},
              {"converged", report.converged},
              {"final_objective", report.final_objective},
              {"nnz_offdiag", report.nnz_offdiag},
              {"fixed_point_max_residual", report.fixed_point_max_residual},
              {"objective_trace", report.objective_trace}};
}

void write_path_csv(const std::string& path, const l0cov::LambdaPath& lp) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "lambda,kl,ebic,nnz,converged\n";
  for (const auto& rec : lp.records)
    os << fmt(rec.lambda) << ',' << fmt(rec.kl) << ',' << fmt(rec.ebic_value)
       << ',' << rec.nnz << ',' << (rec.converged ? 1 : 0) << '\n';
}

struct CommonOpts {
  int p = 100;
  int n = 70;
  int M = 15;
  std::vector<double> alpha = {1.0};
  std::string kind = "nsw";
  std::string solver = "both";
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int grid_points = 40;
  double gamma = 0.5;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
  bool paper_scale = false;
  bool fresh_truth = false;
  double sparse_frac = 0.015;
  double dense_frac = 0.22;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--p", opts.p, "dimension");
  cmd->add_option("--n", opts.n, "samples per replicate");
  cmd->add_option("--M", opts.M, "replicates per sparsity level");
  cmd->add_option("--alpha", opts.alpha, "sparsity levels in [0,1]");
  cmd->add_option("--kind", opts.kind, "truth family: nsw or sw");
  cmd->add_option("--solver", opts.solver, "l0, l1 or both");
  cmd->add_option("--lambda-min", opts.lambda_min, "grid start (0 = auto)");
  cmd->add_option("--lambda-max", opts.lambda_max, "grid end (0 = auto)");
  cmd->add_option("--grid-points", opts.grid_points, "grid size");
  cmd->add_option("--gamma", opts.gamma, "EBIC gamma");
  cmd->add_option("--seed", opts.seed, "master seed");
  cmd->add_option("--jobs", opts.jobs, "worker threads");
  cmd->add_option("--out", opts.out, "output directory")->required();
  cmd->add_flag("--paper-scale", opts.paper_scale,
                "M=50 and a 200-point grid");
  cmd->add_flag("--fresh-truth", opts.fresh_truth,
                "independent truth per replicate");
  cmd->add_option("--sparse-frac", opts.sparse_frac,
                  "total-nnz fraction of p^2 for the sparse endpoint");
  cmd->add_option("--dense-frac", opts.dense_frac,
                  "total-nnz fraction of p^2 for the dense endpoint");
}

l0cov::ExperimentConfig to_config(const CommonOpts& opts) {
  l0cov::ExperimentConfig config;
  config.p = opts.p;
  config.n = opts.n;
  config.M = opts.paper_scale ? 50 : opts.M;
  config.alpha_list = opts.alpha;
  config.kind = parse_kind(opts.kind);
  config.run_l0 = opts.solver == "l0" || opts.solver == "both";
  config.run_l1 = opts.solver == "l1" || opts.solver == "both";
  config.grid.points = opts.paper_scale ? 200 : opts.grid_points;
  config.grid.lambda_min = opts.lambda_min;
  config.grid.lambda_max = opts.lambda_max;
  config.master_seed = opts.seed;
  config.gamma = opts.gamma;
  config.out_dir = opts.out;
  config.jobs = opts.jobs;
  config.fresh_truth = opts.fresh_truth;
  config.sparse_frac = opts.sparse_frac;
  config.dense_frac = opts.dense_frac;
  return config;
}

void run_gen(const CommonOpts& opts, int nnz_override, int attach_override) {
  l0cov::ExperimentConfig config = to_config(opts);
  config.alpha_list = {opts.alpha.front()};
  l0cov::GroundTruth truth;
  const double alpha = opts.alpha.front();
  if (nnz_override >= 0 && config.kind == l0cov::GraphKind::NonSmallWorld) {
    truth = l0cov::gen_nsw(opts.p, nnz_override, opts.seed);
  } else if (attach_override > 0 &&
             config.kind == l0cov::GraphKind::SmallWorld) {
    truth = l0cov::gen_sw(opts.p, attach_override, opts.seed);
  } else {
    truth = l0cov::make_truth(config, 0, 0);
  }
  fs::create_directories(opts.out);
  l0cov::write_matrix((fs::path(opts.out) / "omega.txt").string(),
                      truth.omega);
  l0cov::write_matrix((fs::path(opts.out) / "sigma.txt").string(),
                      truth.sigma);
  const l0cov::Index p = truth.omega.rows();
  l0cov::Matrix adjacency = l0cov::Matrix::Zero(p, p);
  for (auto [i, j] : truth.support) {
    adjacency(i, j) = 1.0;
    adjacency(j, i) = 1.0;
  }
  l0cov::write_matrix((fs::path(opts.out) / "support.txt").string(),
                      adjacency);
  json meta{{"kind", opts.kind},
            {"alpha", alpha},
            {"seed", opts.seed},
            {"p", opts.p},
            {"nnz_offdiag", 2 * truth.support.size()}};
  std::ofstream meta_os(fs::path(opts.out) / "meta.json");
  meta_os << meta.dump(2) << '\n';
  std::cout << "wrote omega/sigma/support + meta.json to " << opts.out << "\n";
}

int run_solve(const std::string& input, double lambda,
              const std::string& solver, const CommonOpts& opts,
              const l0cov::SolverConfig& solver_config) {
  const l0cov::Matrix S = l0cov::read_symmetric(input);
  l0cov::Matrix estimate;
  l0cov::SolveReport report;
  if (solver == "l0") {
    std::tie(estimate, report) = l0cov::solve(S, lambda, solver_config);
  } else if (solver == "l1") {
    l0cov::L1Config l1;
    l1.rel_tol = solver_config.rel_tol;
    l1.max_sweeps = solver_config.max_sweeps;
    l1.refresh_period = solver_config.refresh_period;
    std::tie(estimate, report) = l0cov::solve_l1(S, lambda, l1);
  } else {
    throw CLI::ValidationError("solve needs --solver l0 or l1");
  }
  fs::create_directories(opts.out);
  l0cov::write_matrix((fs::path(opts.out) / "estimate.txt").string(),
                      estimate);
  std::ofstream report_os(fs::path(opts.out) / "report.json");
  report_os << report_to_json(report).dump(2) << '\n';
  std::cout << (report.converged ? "converged" : "max sweeps reached")
            << " after " << report.sweeps_used
            << " sweeps, objective " << report.final_objective
            << ", offdiag nnz " << report.nnz_offdiag << "\n";
  return 0;
}

void run_sweep(const std::string& input, const std::string& sigma_file,
               const CommonOpts& opts) {
  const l0cov::Matrix S = l0cov::read_symmetric(input);
  const int points = opts.paper_scale ? 200 : opts.grid_points;
  std::vector<double> grid;
  if (opts.lambda_min > 0.0 && opts.lambda_max > 0.0)
    grid = l0cov::linear_grid(opts.lambda_min, opts.lambda_max, points);
  else
    grid = l0cov::default_lambda_grid(S, points);
  fs::create_directories(opts.out);
  for (const std::string name : {"l0", "l1"}) {
    if (opts.solver != name && opts.solver != "both") continue;
    const auto kind =
        name == "l0" ? l0cov::SolverKind::L0 : l0cov::SolverKind::L1;
    l0cov::LambdaPath path = l0cov::lambda_sweep(S, grid, kind, {});
    if (!sigma_file.empty())
      l0cov::annotate_kl(path, l0cov::read_symmetric(sigma_file));
    if (opts.n > 0) l0cov::annotate_ebic(path, S, opts.n, opts.gamma);
    write_path_csv((fs::path(opts.out) / ("path_" + name + ".csv")).string(),
                   path);
  }
  std::cout << "wrote path tables to " << opts.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l0/l1 penalized sparse inverse covariance estimation"};
  app.set_config("--config", "", "config file with key = value lines");
  app.require_subcommand(1);

  CommonOpts gen_opts, solve_opts, sweep_opts, exp_opts, roc_opts;

  auto* gen_cmd = app.add_subcommand("gen", "generate a ground truth");
  add_common(gen_cmd, gen_opts);
  int nnz_override = -1, attach_override = -1;
  gen_cmd->add_option("--nnz", nnz_override,
                      "off-diagonal nonzero count (nsw only)");
  gen_cmd->add_option("--attach-m", attach_override,
                      "attachments per node (sw only)");

  auto* solve_cmd = app.add_subcommand("solve", "single penalized solve");
  add_common(solve_cmd, solve_opts);
  std::string solve_input;
  double solve_lambda = 0.1;
  l0cov::SolverConfig solver_config;
  solve_cmd->add_option("--input", solve_input, "sample covariance file")
      ->required();
  solve_cmd->add_option("--lambda", solve_lambda, "penalty")->required();
  solve_cmd->add_option("--rel-tol", solver_config.rel_tol,
                        "relative objective tolerance");
  solve_cmd->add_option("--max-sweeps", solver_config.max_sweeps,
                        "sweep limit");
  solve_cmd->add_option("--refresh-period", solver_config.refresh_period,
                        "sweeps between full re-inversions");

  auto* sweep_cmd = app.add_subcommand("sweep", "lambda-path sweep");
  add_common(sweep_cmd, sweep_opts);
  std::string sweep_input, sweep_sigma;
  sweep_cmd->add_option("--input", sweep_input, "sample covariance file")
      ->required();
  sweep_cmd->add_option("--sigma-true", sweep_sigma,
                        "true covariance (enables the KL column)");

  auto* exp_cmd =
      app.add_subcommand("experiment", "replicated simulation protocol");
  add_common(exp_cmd, exp_opts);

  auto* roc_cmd = app.add_subcommand("roc", "averaged TPR/FPR per lambda");
  add_common(roc_cmd, roc_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      run_gen(gen_opts, nnz_override, attach_override);
    } else if (solve_cmd->parsed()) {
      run_solve(solve_input, solve_lambda,
                solve_opts.solver == "both" ? "l0" : solve_opts.solver,
                solve_opts, solver_config);
    } else if (sweep_cmd->parsed()) {
      run_sweep(sweep_input, sweep_sigma, sweep_opts);
    } else if (exp_cmd->parsed()) {
      const auto records = l0cov::run_experiment(to_config(exp_opts));
      std::cout << "wrote " << records.size() << " records to " << exp_opts.out
                << "\n";
    } else if (roc_cmd->parsed()) {
      const auto table = l0cov::run_roc(to_config(roc_opts));
      std::cout << "wrote " << table.size() << " ROC rows to " << roc_opts.out
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
