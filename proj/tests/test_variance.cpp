#include "doctest.h"
#include "support.hpp"

#include "fpc/error.hpp"
#include "fpc/variance.hpp"

#include <cmath>
#include <numeric>

using namespace fpc;
using namespace fpc::testing;

namespace {

constexpr int kFixtures = 200;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("meats agree with explicit pair sums") {
  for (int id = 0; id < 25; ++id) {
    const Fixture f = random_fixture(id);
    const Matrix& s = f.scores;
    CHECK(max_abs(meat_ehw(s).value - naive_ehw(s)) < 1e-12);
    CHECK(max_abs(lz_meat(s, f.clusters, Dimension::G) - naive_lz(s, f.clusters.g)) < 1e-10);
    CHECK(max_abs(lz_meat(s, f.clusters, Dimension::H) - naive_lz(s, f.clusters.h)) < 1e-10);
    CHECK(max_abs(cgm_meat(s, f.clusters) - naive_cgm(s, f.clusters)) < 1e-10);
    const Matrix cgm2 = naive_lz(s, f.clusters.g) + naive_lz(s, f.clusters.h);
    CHECK(max_abs(cgm2_meat(s, f.clusters) - cgm2) < 1e-10);
    const Matrix delta_c = naive_lz(s, f.clusters.cell) - naive_ehw(s);
    CHECK(max_abs(meat_cluster(s, f.clusters, Dimension::Intersection).value - delta_c) < 1e-10);
  }
}

TEST_CASE("EHW, LZ and CGM2 meats are PSD on random fixtures") {
  for (int id = 0; id < kFixtures; ++id) {
    const Fixture f = random_fixture(id);
    CHECK(min_eig(meat_ehw(f.scores).value) >= -1e-10);
    CHECK(min_eig(lz_meat(f.scores, f.clusters, Dimension::G)) >= -1e-10);
    CHECK(min_eig(lz_meat(f.scores, f.clusters, Dimension::H)) >= -1e-10);
    CHECK(min_eig(cgm2_meat(f.scores, f.clusters)) >= -1e-10);
  }
}

TEST_CASE("CGM2 dominates CGM in the PSD order") {
  for (int id = 0; id < kFixtures; ++id) {
    const Fixture f = random_fixture(id);
    Matrix hess = meat_ehw(f.scores).value + Matrix::Identity(f.scores.cols(), f.scores.cols());
    const auto n = static_cast<std::size_t>(f.scores.rows());
    const Matrix v2 = sandwich(cgm2_meat(f.scores, f.clusters), hess, n).V;
    const Matrix v1 = sandwich(cgm_meat(f.scores, f.clusters), hess, n).V;
    CHECK(min_eig(v2 - v1) >= -1e-10);
  }
}

TEST_CASE("CGM collapses to LZ when the two partitions coincide") {
  for (int id = 0; id < 30; ++id) {
    Fixture f = random_fixture(id);
    std::vector<std::int64_t> g(f.clusters.g.begin(), f.clusters.g.end());
    const ClusterIndex same = canonicalize(std::span<const std::int64_t>(g), std::span<const std::int64_t>(g));
    CHECK(max_abs(cgm_meat(f.scores, same) - lz_meat(f.scores, same, Dimension::G)) < 1e-10);
  }
}

TEST_CASE("meats are permutation equivariant and scale quadratically") {
  for (int id = 0; id < 30; ++id) {
    const Fixture f = random_fixture(id);
    const auto n = static_cast<int>(f.scores.rows());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(77, id, StreamTag::Sampling);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(rng.uniform() * (i + 1))]);
    Matrix s2(n, f.scores.cols());
    std::vector<std::int64_t> g(n), h(n);
    for (int i = 0; i < n; ++i) {
      s2.row(i) = f.scores.row(perm[i]);
      g[i] = f.clusters.g[perm[i]];
      h[i] = f.clusters.h[perm[i]];
    }
    const ClusterIndex c2 = canonicalize(std::span<const std::int64_t>(g), std::span<const std::int64_t>(h));
    CHECK(max_abs(cgm_meat(f.scores, f.clusters) - cgm_meat(s2, c2)) < 1e-10);
    CHECK(max_abs(cgm2_meat(f.scores, f.clusters) - cgm2_meat(s2, c2)) < 1e-10);
    CHECK(max_abs(meat_ehw(f.scores).value - meat_ehw(s2).value) < 1e-12);

    // Scaling the scores by a diagonal D scales every meat to D M D.
    Vector d(f.scores.cols());
    for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = 0.5 + j;
    const Matrix scaled = f.scores * d.asDiagonal();
    const Matrix expect = d.asDiagonal() * cgm_meat(f.scores, f.clusters) * d.asDiagonal();
    CHECK(max_abs(cgm_meat(scaled, f.clusters) - expect) < 1e-9);
  }
}

TEST_CASE("sandwich reports the scaled diagonal and rejects singular Hessians") {
  Matrix meat(2, 2);
  meat << 4.0, 1.0, 1.0, 9.0;
  Matrix hess = Matrix::Identity(2, 2) * 2.0;
  const VarianceReport r = sandwich(meat, hess, 100);
  CHECK(r.V(0, 0) == doctest::Approx(1.0));
  CHECK(r.se(1) == doctest::Approx(std::sqrt(9.0 / 4.0 / 100.0)));

  Matrix singular(2, 2);
  singular << 1.0, 2.0, 2.0, 4.0;
  try {
    sandwich(meat, singular, 10);
    FAIL("expected SingularHessian");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularHessian);
    CHECK(std::string(e.what()).find("condition number") != std::string::npos);
  }
}

TEST_CASE("negative variance diagonals become NaN with a flag") {
  Matrix meat(1, 1);
  meat << -1.0;
  const VarianceReport r = direct_report(meat, 10);
  CHECK(std::isnan(r.se(0)));
  CHECK(r.negative_variance);
}

TEST_CASE("critical values") {
  CHECK(critical_value(99, 0.975) == doctest::Approx(1.9842169516).epsilon(1e-9));
  CHECK(critical_value(49, 0.975) == doctest::Approx(2.0095752371).epsilon(1e-9));
  CHECK(critical_value(kInfiniteDof, 0.975) == doctest::Approx(1.9599639845).epsilon(1e-9));
  CHECK_THROWS_AS(critical_value(0.5, 0.975), Error);
  CHECK_THROWS_AS(critical_value(10, 1.5), Error);
}

TEST_CASE("degrees of freedom follow the cluster counts") {
  const Fixture f = random_fixture(3);
  CHECK(oneway_dof(f.clusters, Dimension::G) == f.clusters.n_g - 1);
  CHECK(twoway_dof(f.clusters) == std::min(f.clusters.n_g, f.clusters.n_h) - 1);
  const Matrix hess = Matrix::Identity(3, 3);
  CHECK(v_ehw(f.scores, hess).dof == doctest::Approx(f.scores.rows() - 3));
  CHECK(v_cgm2(f.scores, hess, f.clusters).family == Family::CGM2);
}

TEST_CASE("small-sample multiplier") {
  const Fixture f = random_fixture(5);
  const Matrix hess = Matrix::Identity(3, 3);
  VarianceOptions o;
  o.small_sample = true;
  const double n = static_cast<double>(f.scores.rows());
  const double G = f.clusters.n_g;
  const double factor = G / (G - 1.0) * (n - 1.0) / (n - 3.0);
  const VarianceReport plain = v_lz_oneway(f.scores, hess, f.clusters, Dimension::G);
  const VarianceReport adj = v_lz_oneway(f.scores, hess, f.clusters, Dimension::G, o);
  CHECK(adj.V(0, 0) == doctest::Approx(plain.V(0, 0) * factor));
}
