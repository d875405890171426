#pragma once

// Repo-wide matrix text format: first line holds the dimension p, followed
// by p rows of p whitespace-delimited decimal values.  Values are written
// with 17 significant digits so a write/read round trip is exact.

#include <iosfwd>
#include <string>

#include "l0cov/types.hpp"

namespace l0cov {

void write_matrix(std::ostream& os, const Matrix& M);
void write_matrix(const std::string& path, const Matrix& M);

Matrix read_matrix(std::istream& is);
Matrix read_matrix(const std::string& path);

/// Loads a matrix that is required to be symmetric: validated with 1e-9
/// absolute tolerance, then exactly symmetrized by averaging.
Matrix read_symmetric(std::istream& is);
Matrix read_symmetric(const std::string& path);

}  // namespace l0cov
