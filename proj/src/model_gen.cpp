#include "l0cov/model_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "l0cov/perturb.hpp"
#include "l0cov/rng.hpp"

namespace l0cov {

namespace {

constexpr double kDiagMargin = 0.5;

double nonzero_normal(Rng& rng) {
  double v = rng.normal();
  while (v == 0.0) v = rng.normal();  // keeps the support bookkeeping exact
  return v;
}

// Sets the diagonal to row-wise absolute sums plus a margin, inverts, and
// collects the support.  omega must hold the off-diagonal values and a
// zero diagonal on entry.
GroundTruth finalize(Matrix omega, GraphKind kind, double alpha,
                     std::uint64_t seed) {
  const Index p = omega.rows();
  for (Index i = 0; i < p; ++i) {
    double row_sum = 0.0;
    for (Index j = 0; j < p; ++j)
      if (j != i) row_sum += std::abs(omega(i, j));
    omega(i, i) = row_sum + kDiagMargin;
  }
  GroundTruth truth;
  truth.kind = kind;
  truth.alpha = alpha;
  truth.seed = seed;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j)
      if (omega(i, j) != 0.0) truth.support.emplace_back(i, j);
  auto [sigma, logdet] = pd_inverse_logdet(omega);
  (void)logdet;
  truth.omega = std::move(omega);
  truth.sigma = std::move(sigma);
  return truth;
}

}  // namespace

GroundTruth gen_nsw(int p, int nnz_target, std::uint64_t seed) {
  if (p < 1) throw BadParams("gen_nsw: p must be positive");
  if (nnz_target < 0 || nnz_target > p * (p - 1) || nnz_target % 2 != 0)
    throw BadParams("gen_nsw: nnz_target must be even and within [0, p(p-1)]");
  Rng rng(seed);
  const int n_pairs = nnz_target / 2;
  const Index total = static_cast<Index>(p) * (p - 1) / 2;
  std::vector<Index> pair_ids(total);
  std::iota(pair_ids.begin(), pair_ids.end(), Index{0});
  // partial Fisher-Yates: the first n_pairs slots become the sample
  for (int k = 0; k < n_pairs; ++k) {
    const Index pick =
        k + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(total - k)));
    std::swap(pair_ids[k], pair_ids[pick]);
  }
  Matrix omega = Matrix::Zero(p, p);
  for (int k = 0; k < n_pairs; ++k) {
    // decode pair id into (i, j), i < j, row-major over the upper triangle
    Index id = pair_ids[k];
    Index i = 0;
    Index row_len = p - 1;
    while (id >= row_len) {
      id -= row_len;
      ++i;
      --row_len;
    }
    const Index j = i + 1 + id;
    const double v = nonzero_normal(rng);
    omega(i, j) = v;
    omega(j, i) = v;
  }
  return finalize(std::move(omega), GraphKind::NonSmallWorld, 1.0, seed);
}

GroundTruth gen_sw(int p, int attach_m, std::uint64_t seed) {
  if (p < 1) throw BadParams("gen_sw: p must be positive");
  if (attach_m < 1 || attach_m >= p)
    throw BadParams("gen_sw: attach_m must be in [1, p-1]");
  Rng rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  std::vector<Index> endpoints;  // one entry per degree unit
  for (Index i = 0; i < attach_m; ++i)
    for (Index j = i + 1; j < attach_m; ++j) {
      edges.emplace_back(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  std::vector<char> taken(p, 0);
  for (Index t = attach_m; t < p; ++t) {
    std::vector<Index> targets;
    targets.reserve(attach_m);
    while (static_cast<int>(targets.size()) < attach_m) {
      Index cand;
      if (endpoints.empty()) {
        cand = static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(t)));
      } else {
        cand = endpoints[rng.uniform_below(endpoints.size())];
      }
      if (taken[cand]) continue;
      taken[cand] = 1;
      targets.push_back(cand);
    }
    for (Index tgt : targets) {
      taken[tgt] = 0;
      edges.emplace_back(tgt, t);
      endpoints.push_back(tgt);
      endpoints.push_back(t);
    }
  }
  Matrix omega = Matrix::Zero(p, p);
  for (auto [i, j] : edges) {
    const double v = nonzero_normal(rng);
    omega(i, j) = v;
    omega(j, i) = v;
  }
  return finalize(std::move(omega), GraphKind::SmallWorld, 1.0, seed);
}

GroundTruth interpolate(const GroundTruth& truth1, const GroundTruth& truth0,
                        double alpha, std::uint64_t seed) {
  const Index p = truth1.omega.rows();
  if (truth0.omega.rows() != p)
    throw BadParams("interpolate: endpoint dimensions differ");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw BadParams("interpolate: alpha must be in [0, 1]");
  Rng rng(seed);
  Matrix omega = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      const double in1 = truth1.omega(i, j) != 0.0 ? 1.0 : 0.0;
      const double in0 = truth0.omega(i, j) != 0.0 ? 1.0 : 0.0;
      const double prob = alpha * in1 + (1.0 - alpha) * in0;
      if (prob <= 0.0) continue;
      if (!rng.bernoulli(prob)) continue;
      const double v =
          alpha * truth1.omega(i, j) + (1.0 - alpha) * truth0.omega(i, j);
      if (v == 0.0) continue;  // exact cancellation: keep the entry out
      omega(i, j) = v;
      omega(j, i) = v;
    }
  }
  return finalize(std::move(omega), truth1.kind, alpha, seed);
}

DataSet sample_gaussian(const Matrix& sigma, int n, std::uint64_t seed) {
  if (n < 1) throw BadParams("sample_gaussian: n must be positive");
  auto chol = cholesky(sigma);
  if (!chol) throw NotPositiveDefinite("sample_gaussian: sigma is not PD");
  const Index p = sigma.rows();
  Rng rng(seed);
  DataSet data;
  data.n = n;
  data.data_seed = seed;
  data.samples.resize(n, p);
  Vector z(p);
  for (int k = 0; k < n; ++k) {
    for (Index i = 0; i < p; ++i) z(i) = rng.normal();
    data.samples.row(k) =
        (chol->factor.triangularView<Eigen::Lower>() * z).transpose();
  }
  return data;
}

Matrix sample_cov(const DataSet& data) {
  if (data.n < 1) throw BadParams("sample_cov: empty data set");
  const Index p = data.samples.cols();
  Matrix S = Matrix::Zero(p, p);
  S.selfadjointView<Eigen::Lower>().rankUpdate(data.samples.transpose(),
                                               1.0 / data.n);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) S(i, j) = S(j, i);
  return S;
}

std::vector<int> degree_histogram(const GroundTruth& truth) {
  std::vector<int> degrees(truth.omega.rows(), 0);
  for (auto [i, j] : truth.support) {
    ++degrees[i];
    ++degrees[j];
  }
  return degrees;
}

}  // namespace l0cov
