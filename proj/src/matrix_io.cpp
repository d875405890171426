#include "l0cov/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "l0cov/perturb.hpp"

namespace l0cov {

namespace {

constexpr double kSymmetryTol = 1e-9;

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& M) {
  os << M.rows() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_value(M(i, j));
    }
    os << '\n';
  }
}

void write_matrix(const std::string& path, const Matrix& M) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix(os, M);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix read_matrix(std::istream& is) {
  Index p = 0;
  if (!(is >> p) || p < 1) throw std::runtime_error("matrix file: bad dimension line");
  Matrix M(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (!(is >> M(i, j)))
        throw std::runtime_error("matrix file: truncated at row " + std::to_string(i));
  return M;
}

Matrix read_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_matrix(is);
}

Matrix read_symmetric(std::istream& is) {
  Matrix M = read_matrix(is);
  if (!is_symmetric(M, kSymmetryTol))
    throw BadCovariance("matrix file: asymmetry exceeds 1e-9");
  symmetrize_average(M);
  return M;
}

Matrix read_symmetric(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_symmetric(is);
}

}  // namespace l0cov
