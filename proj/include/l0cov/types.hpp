#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace l0cov {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;
using Index = Eigen::Index;

struct NotPositiveDefinite : std::runtime_error {
  explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

struct SingularUpdate : std::runtime_error {
  explicit SingularUpdate(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a quantity that must stay strictly positive on a positive
// definite iterate (e.g. y_ii*y_jj - y_ij^2) is observed <= 0; signals
// accumulated round-off in the incremental inverse.
struct DriftDetected : std::runtime_error {
  explicit DriftDetected(const std::string& what) : std::runtime_error(what) {}
};

struct BadCovariance : std::runtime_error {
  explicit BadCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct BadParams : std::runtime_error {
  explicit BadParams(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace l0cov
