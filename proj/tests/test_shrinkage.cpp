#include "doctest.h"
#include "support.hpp"

#include "fpc/error.hpp"
#include "fpc/shrinkage.hpp"

using namespace fpc;
using namespace fpc::testing;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix with_one(const Matrix& z) {
  Matrix out(z.rows(), z.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(z.cols()) = z;
  return out;
}

PopulationMeta meta_for(const ClusterIndex& c, std::int64_t m, int G, int H) {
  return resolve_meta(c, c.rows(), m, G, H);
}

}  // namespace

TEST_CASE("unit projection matches the normal equations") {
  for (int id = 0; id < 20; ++id) {
    const Fixture f = random_fixture(id);
    const Matrix fitted = normal_eq_fit(with_one(f.z), f.scores);
    const Matrix expect = fitted.transpose() * fitted / static_cast<double>(f.scores.rows());
    CHECK(max_abs(delta_z(f.scores, f.z).meat.value - expect) < 1e-10);
  }
}

TEST_CASE("cluster projections use cluster sums and the stated divisor") {
  const Fixture f = random_fixture(11);
  const Matrix zs = cluster_sums(with_one(f.z), f.clusters.g, f.clusters.n_g);
  const Matrix ss = cluster_sums(f.scores, f.clusters.g, f.clusters.n_g);
  const Matrix fitted = normal_eq_fit(zs, ss);
  const Matrix raw = fitted.transpose() * fitted;
  const double n = static_cast<double>(f.scores.rows());
  CHECK(max_abs(delta_z_ce(f.scores, f.z, f.clusters, Dimension::G).meat.value - raw / n) < 1e-9);
  CHECK(max_abs(delta_z_dim(f.scores, f.z, f.clusters, Dimension::G, 5.0 * n).meat.value -
                raw / (5.0 * n)) < 1e-9);
}

TEST_CASE("shrinkage meats are PSD and bounded by their raw second moments") {
  for (int id = 0; id < 200; ++id) {
    const Fixture f = random_fixture(id);
    const Matrix dz = delta_z(f.scores, f.z).meat.value;
    CHECK(min_eig(dz) >= -1e-10);
    CHECK(min_eig(meat_ehw(f.scores).value - dz) >= -1e-10);
    for (Dimension d : {Dimension::G, Dimension::H}) {
      const Matrix ce = delta_z_ce(f.scores, f.z, f.clusters, d).meat.value;
      CHECK(min_eig(ce) >= -1e-10);
      CHECK(min_eig(cluster_outer(f.scores, f.clusters, d) - ce) >= -1e-10);
      const double m = 3.0 * static_cast<double>(f.scores.rows());
      CHECK(min_eig(delta_z_dim(f.scores, f.z, f.clusters, d, m).meat.value) >= -1e-10);
    }
  }
}

TEST_CASE("one-way cases compose the documented terms") {
  const Fixture f = random_fixture(21);
  const auto n = static_cast<std::int64_t>(f.scores.rows());
  AdjustmentInputs in =
      make_adjustment_inputs(f.scores, f.z, f.clusters, meta_for(f.clusters, 4 * n, 2 * f.clusters.n_g, 0));
  const Matrix ehw = meat_ehw(f.scores).value;
  const Matrix dc = meat_cluster(f.scores, f.clusters, Dimension::G).value;
  const Matrix dz = delta_z(f.scores, f.z).meat.value;
  const Matrix dce = delta_z_ce(f.scores, f.z, f.clusters, Dimension::G).meat.value;
  const Matrix none;
  CHECK(max_abs(adjusted_oneway(in, 1, Dimension::G, none).meat - (ehw + 0.5 * dc - 0.25 * dz)) < 1e-12);
  CHECK(max_abs(adjusted_oneway(in, 2, Dimension::G, none).meat - (ehw + dc - 0.25 * dce)) < 1e-12);
  CHECK(max_abs(adjusted_oneway(in, 3, Dimension::G, none).meat - (ehw + dc - 0.25 * dce)) < 1e-12);
  CHECK(max_abs(adjusted_oneway(in, 4, Dimension::G, none).meat - (ehw - 0.25 * dz)) < 1e-12);
  CHECK(!adjusted_oneway(in, 3, Dimension::G, none).report.notes.empty());
  CHECK_THROWS_AS(adjusted_oneway(in, 5, Dimension::G, none), Error);
}

TEST_CASE("two-way cases compose the documented terms") {
  const Fixture f = random_fixture(22);
  const auto n = static_cast<std::int64_t>(f.scores.rows());
  const int G = 2 * f.clusters.n_g, H = 4 * f.clusters.n_h;
  const AdjustmentInputs in = make_adjustment_inputs(f.scores, f.z, f.clusters, meta_for(f.clusters, 2 * n, G, H));
  const Matrix ehw = meat_ehw(f.scores).value;
  const Matrix dg = meat_cluster(f.scores, f.clusters, Dimension::G).value;
  const Matrix dh = meat_cluster(f.scores, f.clusters, Dimension::H).value;
  const Matrix dgh = meat_cluster(f.scores, f.clusters, Dimension::Intersection).value;
  const Matrix dz = delta_z(f.scores, f.z).meat.value;
  const double m = 2.0 * static_cast<double>(n);
  const Matrix pg = delta_z_dim(f.scores, f.z, f.clusters, Dimension::G, m).meat.value;
  const Matrix ph = delta_z_dim(f.scores, f.z, f.clusters, Dimension::H, m).meat.value;
  const Matrix none;
  const Matrix case1 = ehw + 0.5 * (dg - dgh) + 0.75 * (dh - dgh) + (1.0 - 0.125) * dgh - 0.5 * dz;
  CHECK(max_abs(adjusted_twoway(in, 1, none).meat - case1) < 1e-12);
  CHECK(max_abs(adjusted_twoway(in, 2, none).meat - (2.0 * ehw + dg + dh - 0.5 * (pg + ph))) < 1e-12);
  CHECK(max_abs(adjusted_cgm(in, none).meat - (cgm_meat(f.scores, f.clusters) - 0.5 * (pg + ph))) < 1e-12);

  AdjustmentInputs rescaled = in;
  rescaled.rescale_by_sampling = true;
  CHECK(max_abs(adjusted_twoway(rescaled, 2, none).meat - (2.0 * ehw + dg + dh - (pg + ph))) < 1e-12);
}

TEST_CASE("adjusted families require population metadata") {
  const Fixture f = random_fixture(23);
  const AdjustmentInputs bare =
      make_adjustment_inputs(f.scores, f.z, f.clusters, resolve_meta(f.clusters, f.clusters.rows(), 0, 0, 0));
  const Matrix none;
  for (auto call : {+[](const AdjustmentInputs& in) { adjusted_oneway(in, 2, Dimension::G, Matrix()); },
                    +[](const AdjustmentInputs& in) { adjusted_twoway(in, 2, Matrix()); },
                    +[](const AdjustmentInputs& in) { adjusted_cgm(in, Matrix()); }}) {
    try {
      call(bare);
      FAIL("expected MetadataRequired");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MetadataRequired);
    }
  }
  const auto n = static_cast<std::int64_t>(f.scores.rows());
  const AdjustmentInputs only_m =
      make_adjustment_inputs(f.scores, f.z, f.clusters, resolve_meta(f.clusters, f.clusters.rows(), n, 0, 0));
  CHECK_NOTHROW(adjusted_oneway(only_m, 2, Dimension::G, none));
  CHECK_THROWS_AS(adjusted_oneway(only_m, 1, Dimension::G, none), Error);
}

TEST_CASE("collinear attributes are dropped with a note, or rejected in strict mode") {
  const Fixture f = random_fixture(24);
  Matrix z(f.z.rows(), 3);
  z << f.z, 2.0 * f.z.col(0);
  const Projection p = delta_z(f.scores, z);
  REQUIRE(p.dropped.size() == 1);
  CHECK(max_abs(p.meat.value - delta_z(f.scores, f.z).meat.value) < 1e-9);

  const auto n = static_cast<std::int64_t>(f.scores.rows());
  AdjustmentInputs in = make_adjustment_inputs(f.scores, z, f.clusters, resolve_meta(f.clusters, f.clusters.rows(), n, 0, 0));
  in.z_names = {"a", "b", "c"};
  const AdjustedVariance a = adjusted_oneway(in, 4, Dimension::G, Matrix());
  REQUIRE(!a.report.notes.empty());
  CHECK(a.report.notes.front().find("dropped collinear") != std::string::npos);

  in.projection.strict = true;
  try {
    adjusted_oneway(in, 4, Dimension::G, Matrix());
    FAIL("expected SingularAttributes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularAttributes);
  }
}

TEST_CASE("attribute-free projection removes the mean score") {
  const Fixture f = random_fixture(25);
  const Matrix empty(f.scores.rows(), 0);
  const Vector mean = f.scores.colwise().mean();
  const Matrix expect = mean * mean.transpose();
  CHECK(max_abs(delta_z(f.scores, empty).meat.value - expect) < 1e-10);
}
