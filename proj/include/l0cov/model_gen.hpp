#pragma once

// Synthetic ground-truth precision matrices and Gaussian sampling.
//
// Two graph families: uniformly random off-diagonal support (light-tailed
// degrees) and preferential attachment (heavy-tailed degrees).  Nonzero
// values are standard normal draws mirrored across the diagonal; the
// diagonal is set to the row-wise absolute sum plus 0.5 so every Omega is
// strictly diagonally dominant, hence positive definite.

#include <cstdint>
#include <utility>
#include <vector>

#include "l0cov/types.hpp"

namespace l0cov {

enum class GraphKind { NonSmallWorld, SmallWorld };

struct GroundTruth {
  Matrix omega;   // true precision, PD
  Matrix sigma;   // omega^{-1}
  std::vector<std::pair<Index, Index>> support;  // off-diagonal nonzeros, i < j
  GraphKind kind = GraphKind::NonSmallWorld;
  double alpha = 1.0;
  std::uint64_t seed = 0;
};

struct DataSet {
  Matrix samples;  // n x p, one observation per row
  int n = 0;
  std::uint64_t truth_seed = 0;
  std::uint64_t data_seed = 0;
};

/// Uniformly random support with nnz_target off-diagonal nonzeros
/// (counting both triangles, so nnz_target must be even).
GroundTruth gen_nsw(int p, int nnz_target, std::uint64_t seed);

/// Preferential-attachment graph: attach_m fully connected seed nodes,
/// then each new node attaches to attach_m existing nodes with probability
/// proportional to current degree.
GroundTruth gen_sw(int p, int attach_m, std::uint64_t seed);

/// Stochastic combination of a sparse endpoint (alpha = 1) and a dense
/// endpoint (alpha = 0): each pair (i, j) enters with probability
///   alpha*[omega1_ij != 0] + (1 - alpha)*[omega0_ij != 0]
/// and, when present, carries alpha*omega1_ij + (1 - alpha)*omega0_ij.
/// The diagonal is re-repaired for positive definiteness.
GroundTruth interpolate(const GroundTruth& truth1, const GroundTruth& truth0,
                        double alpha, std::uint64_t seed);

/// n i.i.d. zero-mean Gaussian rows with covariance sigma.
DataSet sample_gaussian(const Matrix& sigma, int n, std::uint64_t seed);

/// S = (1/n) * sum_k x_k x_k^T (known zero mean, divisor n).
Matrix sample_cov(const DataSet& data);

/// Per-node count of off-diagonal nonzeros.
std::vector<int> degree_histogram(const GroundTruth& truth);

}  // namespace l0cov
