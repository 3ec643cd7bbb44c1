#include "fpc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace fpc {

PivotedSolve pivoted_least_squares(const Matrix& design, const Matrix& rhs,
                                   double tol) {
  const Eigen::Index k = design.cols();
  PivotedSolve out;
  out.coef = Matrix::Zero(k, rhs.cols());
  if (k == 0) return out;

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  const Matrix& r = qr.matrixR();
  const Eigen::Index diag = std::min<Eigen::Index>(design.rows(), k);
  const double largest = diag > 0 ? std::abs(r(0, 0)) : 0.0;
  Eigen::Index rank = 0;
  while (rank < diag && largest > 0.0 && std::abs(r(rank, rank)) > tol * largest) ++rank;
  out.rank = static_cast<int>(rank);

  const auto& perm = qr.colsPermutation().indices();
  std::vector<bool> kept(k, false);
  for (Eigen::Index j = 0; j < rank; ++j) kept[perm(j)] = true;
  for (Eigen::Index j = 0; j < k; ++j)
    if (!kept[j]) out.dropped.push_back(static_cast<int>(j));

  if (rank == 0) return out;
  // Solve on the kept columns only so that the dropped ones get exact zeros.
  std::vector<int> keep;
  for (Eigen::Index j = 0; j < k; ++j)
    if (kept[j]) keep.push_back(static_cast<int>(j));
  Matrix sub(design.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) sub.col(j) = design.col(keep[j]);
  Matrix coef = sub.colPivHouseholderQr().solve(rhs);
  for (std::size_t j = 0; j < keep.size(); ++j) out.coef.row(keep[j]) = coef.row(j);
  return out;
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double condition_number(const Matrix& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

std::string join_names(const std::vector<std::string>& names,
                       const std::vector<int>& which) {
  std::string out;
  for (int j : which) {
    if (!out.empty()) out += ", ";
    if (j >= 0 && static_cast<std::size_t>(j) < names.size())
      out += names[j];
    else
      out += "column " + std::to_string(j);
  }
  return out;
}

}  // namespace fpc
