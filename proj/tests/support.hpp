#pragma once

// Fixture generators and brute-force reference computations shared by the
// unit and acceptance suites. Everything here is deliberately naive.

#include "fpc/data_model.hpp"
#include "fpc/dgp.hpp"
#include "fpc/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <vector>

namespace fpc::testing {

struct Fixture {
  ClusterIndex clusters;
  Matrix scores;
  Matrix z;
};

// Random unbalanced two-way layout with k score columns and q attributes.
inline Fixture random_fixture(std::uint64_t id, int k = 3, int q = 2) {
  Rng rng(0xF1C5ULL, id, StreamTag::Population);
  const int G = 2 + static_cast<int>(rng.uniform() * 7);
  const int H = 2 + static_cast<int>(rng.uniform() * 7);
  const int n = G * H + static_cast<int>(rng.uniform() * 40);
  std::vector<std::int64_t> g(n), h(n);
  for (int i = 0; i < n; ++i) {
    // every cluster appears at least once
    g[i] = i < G ? i : static_cast<std::int64_t>(rng.uniform() * G);
    h[i] = i < H ? i : static_cast<std::int64_t>(rng.uniform() * H);
  }
  Fixture f;
  f.clusters = canonicalize(std::span<const std::int64_t>(g), std::span<const std::int64_t>(h));
  f.scores.resize(n, k);
  Vector shock_g(G * k), shock_h(H * k);
  for (auto& v : shock_g) v = rng.normal();
  for (auto& v : shock_h) v = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      f.scores(i, j) = rng.normal() + shock_g(g[i] * k + j) + shock_h(h[i] * k + j);
  f.z.resize(n, q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j) f.z(i, j) = rng.normal() + 0.5 * shock_g(g[i] * k);
  return f;
}

inline double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

// (1/n) sum_i sum_j w(i, j) s_i s_j' by explicit double loop.
template <typename Pred>
Matrix pair_sum(const Matrix& s, Pred same) {
  const Eigen::Index n = s.rows();
  Matrix out = Matrix::Zero(s.cols(), s.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (same(i, j)) out += s.row(i).transpose() * s.row(j);
  return out / static_cast<double>(n);
}

inline Matrix naive_ehw(const Matrix& s) {
  return pair_sum(s, [](Eigen::Index i, Eigen::Index j) { return i == j; });
}

inline Matrix naive_lz(const Matrix& s, const std::vector<int>& ids) {
  return pair_sum(s, [&](Eigen::Index i, Eigen::Index j) { return ids[i] == ids[j]; });
}

inline Matrix naive_cgm(const Matrix& s, const ClusterIndex& c) {
  return pair_sum(s, [&](Eigen::Index i, Eigen::Index j) {
    return c.g[i] == c.g[j] || c.h[i] == c.h[j];
  });
}

// Least-squares residual of each column of y on x via the normal equations.
inline Matrix normal_eq_fit(const Matrix& x, const Matrix& y) {
  return x * (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

// Dummy matrix for dense labels, dropping the first level when asked.
inline Matrix dummies(const std::vector<int>& ids, int count, bool drop_first) {
  const int first = drop_first ? 1 : 0;
  Matrix d = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), count - first);
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] >= first) d(static_cast<Eigen::Index>(i), ids[i] - first) = 1.0;
  return d;
}

inline Matrix hcat(const std::vector<Matrix>& blocks) {
  Eigen::Index cols = 0, rows = blocks.front().rows();
  for (const auto& b : blocks) cols += b.cols();
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

}  // namespace fpc::testing
