#include "l0cov/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "l0cov/rng.hpp"

namespace l0cov {

namespace {

using nlohmann::json;

// salts for deriving independent streams from a replicate seed
constexpr std::uint64_t kDataSalt = 0xDA7A;
constexpr std::uint64_t kTruthSparseSalt = 0x7501;
constexpr std::uint64_t kTruthDenseSalt = 0x7500;
constexpr std::uint64_t kTruthMixSalt = 0x75AA;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int even_floor(int v) { return v - (v % 2); }

// Off-diagonal nonzero budget implied by a total-nnz fraction of p^2
// (the diagonal is always fully nonzero).
int offdiag_budget(int p, double frac) {
  const int total = static_cast<int>(std::llround(frac * p * p));
  return even_floor(std::max(0, total - p));
}

// Attachment count whose edge total best matches the dense budget.
int attach_for_budget(int p, int nnz_offdiag_target) {
  const int target_edges = nnz_offdiag_target / 2;
  int best_m = 1;
  long best_err = -1;
  for (int m = 1; m < p; ++m) {
    const long edges =
        static_cast<long>(m) * (m - 1) / 2 + static_cast<long>(p - m) * m;
    const long err = std::abs(edges - target_edges);
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best_m = m;
    }
    if (edges > target_edges) break;  // edge count grows with m in range
  }
  return best_m;
}

GroundTruth endpoint_truth(const ExperimentConfig& config, bool sparse,
                           std::uint64_t seed) {
  const double frac = sparse ? config.sparse_frac : config.dense_frac;
  if (config.kind == GraphKind::NonSmallWorld)
    return gen_nsw(config.p, offdiag_budget(config.p, frac), seed);
  const int m =
      sparse ? 1 : attach_for_budget(config.p, offdiag_budget(config.p, frac));
  return gen_sw(config.p, m, seed);
}

GroundTruth truth_for_alpha(const ExperimentConfig& config, double alpha,
                            std::uint64_t seed_base) {
  GroundTruth truth;
  if (alpha == 1.0) {
    truth = endpoint_truth(config, true,
                           combine_seed(seed_base, kTruthSparseSalt));
  } else if (alpha == 0.0) {
    truth = endpoint_truth(config, false,
                           combine_seed(seed_base, kTruthDenseSalt));
  } else {
    GroundTruth sparse = endpoint_truth(
        config, true, combine_seed(seed_base, kTruthSparseSalt));
    GroundTruth dense = endpoint_truth(
        config, false, combine_seed(seed_base, kTruthDenseSalt));
    truth = interpolate(sparse, dense, alpha,
                        combine_seed(seed_base, kTruthMixSalt));
  }
  truth.alpha = alpha;
  return truth;
}

std::pair<double, double> support_amplitudes(const Matrix& estimate,
                                             const GroundTruth& truth) {
  if (truth.support.empty()) return {0.0, 0.0};
  double est_sum = 0.0;
  double true_sum = 0.0;
  for (auto [i, j] : truth.support) {
    est_sum += std::abs(estimate(i, j));
    true_sum += std::abs(truth.omega(i, j));
  }
  const double count = static_cast<double>(truth.support.size());
  return {est_sum / count, true_sum / count};
}

void fill_record(RunRecord& rec, LambdaPath& path, const GroundTruth& truth,
                 const Matrix& S, const ExperimentConfig& config) {
  auto [lam_oracle, kl_oracle] = oracle_select(path, truth.sigma);
  auto [lam_ebic, kl_ebic] =
      ebic_select(path, S, config.n, config.gamma, truth.sigma);
  rec.lambda_oracle = lam_oracle;
  rec.kl_oracle = kl_oracle;
  rec.lambda_ebic = lam_ebic;
  rec.kl_ebic = kl_ebic;
  rec.true_nnz = static_cast<int>(truth.support.size());
  for (const auto& path_rec : path.records) {
    if (path_rec.lambda == lam_oracle && path_rec.solved) {
      auto [tpr, fpr] = support_metrics(path_rec.estimate, truth);
      rec.tpr = tpr;
      rec.fpr = fpr;
      rec.nnz_oracle = path_rec.nnz;
      auto [est_amp, true_amp] = support_amplitudes(path_rec.estimate, truth);
      rec.mean_abs_est_amplitude = est_amp;
      rec.mean_abs_true_amplitude = true_amp;
      break;
    }
  }
  rec.ok = true;
}

void parallel_for(int n_tasks, int jobs,
                  const std::function<void(int)>& body) {
  if (jobs <= 1 || n_tasks <= 1) {
    for (int t = 0; t < n_tasks; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min(jobs, n_tasks);
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w)
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1))
        body(t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

GroundTruth make_truth(const ExperimentConfig& config, int alpha_index,
                       int replicate) {
  const double alpha = config.alpha_list.at(alpha_index);
  if (config.fresh_truth) {
    const std::uint64_t rep_seed =
        combine_seed(config.master_seed, alpha_index, replicate);
    return truth_for_alpha(config, alpha, rep_seed);
  }
  return truth_for_alpha(config, alpha,
                         combine_seed(config.master_seed, alpha_index, ~std::uint64_t{0}));
}

EnsembleResult run_ensemble(const ExperimentConfig& config) {
  if (config.M < 1 || config.p < 2 || config.n < 1)
    throw BadParams("run_ensemble: need M >= 1, p >= 2, n >= 1");
  for (double a : config.alpha_list)
    if (!(a >= 0.0 && a <= 1.0))
      throw BadParams("run_ensemble: alpha outside [0, 1]");
  if (!config.run_l0 && !config.run_l1)
    throw BadParams("run_ensemble: no solver selected");

  EnsembleResult result;
  result.per_alpha.resize(config.alpha_list.size());

  const bool explicit_grid =
      config.grid.lambda_min > 0.0 && config.grid.lambda_max > 0.0;

  for (std::size_t a = 0; a < config.alpha_list.size(); ++a) {
    AlphaResult& slot = result.per_alpha[a];
    slot.alpha = config.alpha_list[a];
    slot.outcomes.resize(config.M);

    GroundTruth shared_truth;
    if (!config.fresh_truth)
      shared_truth = make_truth(config, static_cast<int>(a), 0);

    // grid shared across replicates: derived from replicate 0's S
    std::vector<double> shared_grid;
    if (explicit_grid) {
      shared_grid = linear_grid(config.grid.lambda_min, config.grid.lambda_max,
                                config.grid.points);
    } else if (config.grid.shared) {
      const GroundTruth& t0 = config.fresh_truth
                                  ? (shared_truth = make_truth(
                                         config, static_cast<int>(a), 0))
                                  : shared_truth;
      const std::uint64_t rep_seed =
          combine_seed(config.master_seed, a, 0);
      DataSet data = sample_gaussian(t0.sigma, config.n,
                                     combine_seed(rep_seed, kDataSalt));
      const Matrix s0 = sample_cov(data);
      shared_grid = config.grid.support_range
                        ? support_sweep_grid(s0, config.grid.points)
                        : default_lambda_grid(s0, config.grid.points);
    }

    auto run_one = [&, a](int rep) {
      ReplicateOutcome& out = slot.outcomes[rep];
      const std::uint64_t rep_seed =
          combine_seed(config.master_seed, a, rep);
      try {
        const GroundTruth truth = config.fresh_truth
                                      ? make_truth(config, static_cast<int>(a), rep)
                                      : shared_truth;
        DataSet data = sample_gaussian(truth.sigma, config.n,
                                       combine_seed(rep_seed, kDataSalt));
        data.truth_seed = truth.seed;
        const Matrix S = sample_cov(data);
        const std::vector<double> grid =
            !shared_grid.empty()
                ? shared_grid
                : (config.grid.support_range
                       ? support_sweep_grid(S, config.grid.points)
                       : default_lambda_grid(S, config.grid.points));
        for (SolverKind kind : {SolverKind::L0, SolverKind::L1}) {
          if (kind == SolverKind::L0 && !config.run_l0) continue;
          if (kind == SolverKind::L1 && !config.run_l1) continue;
          LambdaPath path = lambda_sweep(S, grid, kind, config.solver);
          RunRecord rec;
          rec.replicate_id = rep;
          rec.seed = rep_seed;
          rec.alpha = slot.alpha;
          rec.n = config.n;
          rec.p = config.p;
          rec.solver = kind;
          fill_record(rec, path, truth, S, config);
          auto& tprfpr =
              kind == SolverKind::L0 ? out.tprfpr_l0 : out.tprfpr_l1;
          tprfpr.reserve(path.records.size());
          for (const auto& path_rec : path.records) {
            if (path_rec.solved)
              tprfpr.push_back(support_metrics(path_rec.estimate, truth));
            else
              tprfpr.push_back({std::nan(""), std::nan("")});
          }
          (kind == SolverKind::L0 ? out.l0 : out.l1) = rec;
        }
        if (rep == 0 && slot.grid.empty()) slot.grid = grid;
      } catch (const std::exception& e) {
        out.failed = true;
        out.error = e.what();
      }
    };

    parallel_for(config.M, config.jobs, run_one);

    if (slot.grid.empty() && !shared_grid.empty()) slot.grid = shared_grid;

    int failed = 0;
    for (const auto& out : slot.outcomes)
      if (out.failed) ++failed;
    if (failed > config.fail_limit * config.M)
      throw std::runtime_error(
          "run_ensemble: " + std::to_string(failed) + " of " +
          std::to_string(config.M) + " replicates failed (first error: " +
          [&] {
            for (const auto& out : slot.outcomes)
              if (out.failed) return out.error;
            return std::string();
          }() +
          ")");
  }
  return result;
}

std::string records_csv_header() {
  return "replicate_id,solver,alpha,n,p,seed,lambda_oracle,kl_oracle,"
         "lambda_ebic,kl_ebic,tpr,fpr,nnz_oracle,true_nnz,"
         "mean_abs_est_amplitude,mean_abs_true_amplitude,ok";
}

void write_records_csv(const std::string& path,
                       const std::vector<RunRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << records_csv_header() << '\n';
  for (const auto& r : records) {
    os << r.replicate_id << ',' << solver_name(r.solver) << ','
       << fmt(r.alpha) << ',' << r.n << ',' << r.p << ',' << r.seed << ','
       << fmt(r.lambda_oracle) << ',' << fmt(r.kl_oracle) << ','
       << fmt(r.lambda_ebic) << ',' << fmt(r.kl_ebic) << ',' << fmt(r.tpr)
       << ',' << fmt(r.fpr) << ',' << r.nnz_oracle << ',' << r.true_nnz << ','
       << fmt(r.mean_abs_est_amplitude) << ','
       << fmt(r.mean_abs_true_amplitude) << ',' << (r.ok ? 1 : 0) << '\n';
  }
}

void write_roc_csv(const std::string& path,
                   const std::vector<RocPoint>& table) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "lambda,tpr_mean,fpr_mean,solver\n";
  for (const auto& row : table)
    os << fmt(row.lambda) << ',' << fmt(row.tpr_mean) << ','
       << fmt(row.fpr_mean) << ',' << solver_name(row.solver) << '\n';
}

namespace {

std::vector<RunRecord> flatten_records(const EnsembleResult& ensemble,
                                       const ExperimentConfig& config) {
  std::vector<RunRecord> records;
  for (const auto& alpha_slot : ensemble.per_alpha) {
    for (const auto& out : alpha_slot.outcomes) {
      if (out.failed) continue;
      if (config.run_l0) records.push_back(out.l0);
      if (config.run_l1) records.push_back(out.l1);
    }
  }
  return records;
}

json stats_to_json(const MetricStats& stats) {
  return json{{"mean", stats.mean},
              {"se", stats.se},
              {"min", stats.min},
              {"max", stats.max},
              {"count", stats.count}};
}

void write_aggregate_outputs(const EnsembleResult& ensemble,
                             const ExperimentConfig& config,
                             const std::vector<RunRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  write_records_csv((fs::path(config.out_dir) / "records.csv").string(),
                    records);

  json agg;
  agg["master_seed"] = config.master_seed;
  agg["p"] = config.p;
  agg["n"] = config.n;
  agg["M"] = config.M;
  agg["kind"] = config.kind == GraphKind::NonSmallWorld ? "nsw" : "sw";
  agg["gamma"] = config.gamma;
  agg["fresh_truth"] = config.fresh_truth;
  agg["groups"] = json::array();
  agg["ratios"] = json::array();

  std::ofstream ratio_csv(fs::path(config.out_dir) / "kl_ratio_vs_alpha.csv");
  ratio_csv << "alpha,kl_oracle_l0,kl_oracle_l1,ratio_oracle,"
               "kl_ebic_l0,kl_ebic_l1,ratio_ebic,se_oracle_l0,se_oracle_l1\n";

  for (const auto& alpha_slot : ensemble.per_alpha) {
    std::vector<RunRecord> l0_recs, l1_recs;
    for (const auto& r : records) {
      if (r.alpha != alpha_slot.alpha || !r.ok) continue;
      (r.solver == SolverKind::L0 ? l0_recs : l1_recs).push_back(r);
    }
    for (auto* group : {&l0_recs, &l1_recs}) {
      if (group->empty()) continue;
      json entry;
      entry["alpha"] = alpha_slot.alpha;
      entry["solver"] = solver_name(group->front().solver);
      for (auto& [name, stats] : aggregate(*group))
        entry["metrics"][name] = stats_to_json(stats);
      agg["groups"].push_back(std::move(entry));
    }
    if (!l0_recs.empty() && !l1_recs.empty()) {
      const auto stats_l0 = aggregate(l0_recs);
      const auto stats_l1 = aggregate(l1_recs);
      const double ratio_oracle = kl_ratio_of_means(l1_recs, l0_recs, false);
      const double ratio_ebic = kl_ratio_of_means(l1_recs, l0_recs, true);
      json entry;
      entry["alpha"] = alpha_slot.alpha;
      entry["kl_oracle_ratio_l1_over_l0"] = ratio_oracle;
      entry["kl_ebic_ratio_l1_over_l0"] = ratio_ebic;
      agg["ratios"].push_back(std::move(entry));
      ratio_csv << fmt(alpha_slot.alpha) << ','
                << fmt(stats_l0.at("kl_oracle").mean) << ','
                << fmt(stats_l1.at("kl_oracle").mean) << ','
                << fmt(ratio_oracle) << ','
                << fmt(stats_l0.at("kl_ebic").mean) << ','
                << fmt(stats_l1.at("kl_ebic").mean) << ','
                << fmt(ratio_ebic) << ','
                << fmt(stats_l0.at("kl_oracle").se) << ','
                << fmt(stats_l1.at("kl_oracle").se) << '\n';
    }
  }

  std::ofstream agg_os(fs::path(config.out_dir) / "aggregate.json");
  agg_os << agg.dump(2) << '\n';
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      EnsembleResult* ensemble_out) {
  EnsembleResult ensemble = run_ensemble(config);
  std::vector<RunRecord> records = flatten_records(ensemble, config);
  if (!config.out_dir.empty())
    write_aggregate_outputs(ensemble, config, records);
  if (ensemble_out) *ensemble_out = std::move(ensemble);
  return records;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, nullptr);
}

std::vector<RocPoint> roc_from_ensemble(const EnsembleResult& ensemble,
                                        const ExperimentConfig& config) {
  std::vector<RocPoint> table;
  for (const auto& alpha_slot : ensemble.per_alpha) {
    const auto& grid = alpha_slot.grid;
    for (SolverKind kind : {SolverKind::L0, SolverKind::L1}) {
      if (kind == SolverKind::L0 && !config.run_l0) continue;
      if (kind == SolverKind::L1 && !config.run_l1) continue;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double tpr_sum = 0.0, fpr_sum = 0.0;
        int count = 0;
        for (const auto& out : alpha_slot.outcomes) {
          if (out.failed) continue;
          const auto& tprfpr =
              kind == SolverKind::L0 ? out.tprfpr_l0 : out.tprfpr_l1;
          if (g >= tprfpr.size() || std::isnan(tprfpr[g].first)) continue;
          tpr_sum += tprfpr[g].first;
          fpr_sum += tprfpr[g].second;
          ++count;
        }
        if (count == 0) continue;
        table.push_back(
            {grid[g], tpr_sum / count, fpr_sum / count, kind});
      }
    }
  }
  return table;
}

std::vector<RocPoint> run_roc(const ExperimentConfig& config) {
  ExperimentConfig roc_config = config;
  roc_config.grid.shared = true;  // averaging needs matched lambdas
  roc_config.grid.support_range = true;
  EnsembleResult ensemble = run_ensemble(roc_config);
  std::vector<RocPoint> table = roc_from_ensemble(ensemble, roc_config);
  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    write_roc_csv((fs::path(config.out_dir) / "roc.csv").string(), table);
  }
  return table;
}

std::vector<AmplitudeRow> amplitude_report(
    const std::vector<RunRecord>& records) {
  std::vector<AmplitudeRow> rows;
  for (SolverKind kind : {SolverKind::L0, SolverKind::L1}) {
    double est_sum = 0.0, true_sum = 0.0;
    int count = 0;
    for (const auto& r : records) {
      if (!r.ok || r.solver != kind) continue;
      est_sum += r.mean_abs_est_amplitude;
      true_sum += r.mean_abs_true_amplitude;
      ++count;
    }
    if (count == 0) continue;
    AmplitudeRow row;
    row.solver = kind;
    row.mean_abs_est = est_sum / count;
    row.mean_abs_truth = true_sum / count;
    row.shrinkage_ratio =
        row.mean_abs_truth > 0.0 ? row.mean_abs_est / row.mean_abs_truth : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace l0cov
