#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Least-squares solve with column pivoting. Columns whose pivot falls below
// `tol` relative to the largest pivot are reported in `dropped` (original
// column order) and receive a zero coefficient.
struct PivotedSolve {
  Matrix coef;
  std::vector<int> dropped;
  int rank = 0;
};

PivotedSolve pivoted_least_squares(const Matrix& design, const Matrix& rhs,
                                   double tol = 1e-10);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& sym);

// 2-norm condition number via singular values; +inf for singular input.
double condition_number(const Matrix& a);

Matrix symmetrize(const Matrix& a);

std::string join_names(const std::vector<std::string>& names,
                       const std::vector<int>& which);

}  // namespace fpc
