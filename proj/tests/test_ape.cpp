#include "doctest.h"
#include "support.hpp"

#include "fpc/ape.hpp"
#include "fpc/error.hpp"

#include <cmath>

using namespace fpc;
using namespace fpc::testing;

namespace {

struct ProbitCase {
  FittedModel model;
  ScoreBundle scores;
  ClusterIndex clusters;
};

ProbitCase probit_case(std::uint64_t id) {
  const Fixture f = random_fixture(id, 1, 1);
  Rng rng(0xA9E, id, StreamTag::Assignment);
  const auto n = static_cast<Eigen::Index>(f.clusters.rows());
  Matrix d(n, 3);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, 0) = 1.0;
    d(i, 1) = rng.coin() ? 1.0 : 0.0;
    d(i, 2) = f.z(i, 0);
    y(i) = rng.uniform() < normal_cdf(-0.2 + 0.6 * d(i, 1) + 0.4 * d(i, 2)) ? 1.0 : 0.0;
  }
  ProbitCase c;
  c.model = fit_probit(d, y);
  c.scores = probit_scores(c.model);
  c.clusters = f.clusters;
  return c;
}

double mean_difference(const Matrix& d, const Vector& theta, bool treated) {
  double s = 0.0, n = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (treated && d(i, 1) != 1.0) continue;
    Vector r1 = d.row(i).transpose(), r0 = r1;
    r1(1) = 1.0;
    r0(1) = 0.0;
    s += normal_cdf(r1.dot(theta)) - normal_cdf(r0.dot(theta));
    n += 1.0;
  }
  return s / n;
}

}  // namespace

TEST_CASE("APE gradient matches finite differences") {
  for (int id = 0; id < 8; ++id) {
    const ProbitCase c = probit_case(id + 40);
    for (bool treated : {false, true}) {
      const ApeResult a = probit_ape_binary(c.model, c.scores, 1, treated);
      CHECK(std::abs(a.gamma(0) - mean_difference(c.model.design, c.model.theta, treated)) < 1e-14);
      for (Eigen::Index j = 0; j < c.model.theta.size(); ++j) {
        const double h = 1e-6;
        Vector up = c.model.theta, dn = c.model.theta;
        up(j) += h;
        dn(j) -= h;
        const double fd = (mean_difference(c.model.design, up, treated) -
                           mean_difference(c.model.design, dn, treated)) / (2 * h);
        CHECK(std::abs(a.F_hat(0, j) - fd) < 1e-7);
      }
      // residuals are centered: mean score and mean of (f - gamma) are zero
      CHECK(std::abs(a.psi.col(0).mean()) < 1e-8);
    }
  }
}

TEST_CASE("generic APE reproduces the binary probability difference") {
  const ProbitCase c = probit_case(51);
  const Matrix& d = c.model.design;
  ApeFunction fn;
  fn.f = [&](const Vector& theta) {
    Matrix out(d.rows(), 1);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      Vector r1 = d.row(i).transpose(), r0 = r1;
      r1(1) = 1.0;
      r0(1) = 0.0;
      out(i, 0) = normal_cdf(r1.dot(theta)) - normal_cdf(r0.dot(theta));
    }
    return out;
  };
  fn.grad = [&](const Vector& theta, int i) {
    Vector r1 = d.row(i).transpose(), r0 = r1;
    r1(1) = 1.0;
    r0(1) = 0.0;
    Matrix g(1, theta.size());
    g.row(0) = (normal_pdf(r1.dot(theta)) * r1 - normal_pdf(r0.dot(theta)) * r0).transpose();
    return g;
  };
  const ApeResult a = generic_ape(c.model, c.scores, fn);
  const ApeResult b = probit_ape_binary(c.model, c.scores, 1);
  CHECK(std::abs(a.gamma(0) - b.gamma(0)) < 1e-14);
  CHECK((a.psi - b.psi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("APE variance families use the residual psi directly") {
  const ProbitCase c = probit_case(52);
  const ApeResult a = probit_ape_binary(c.model, c.scores, 1);
  const double n = static_cast<double>(a.psi.rows());
  ApeVarianceRequest req;
  req.family = Family::LZ_OneWay;
  const VarianceReport lz = ape_variance(a, c.clusters, req);
  CHECK(lz.se(0) == doctest::Approx(std::sqrt(naive_lz(a.psi, c.clusters.g)(0, 0) / n)));
  req.family = Family::CGM2;
  const VarianceReport v2 = ape_variance(a, c.clusters, req);
  req.family = Family::CGM;
  const VarianceReport v1 = ape_variance(a, c.clusters, req);
  CHECK(v2.V(0, 0) >= v1.V(0, 0) - 1e-12);
  req.family = Family::AdjOneWay;
  req.case_id = 2;
  CHECK_THROWS_AS(ape_variance(a, c.clusters, req), Error);
}

TEST_CASE("APE input checks") {
  const ProbitCase c = probit_case(53);
  CHECK_THROWS_AS(probit_ape_binary(c.model, c.scores, 2), Error);  // continuous column
  CHECK_THROWS_AS(probit_ape_binary(c.model, c.scores, 7), Error);
  FittedModel ols = c.model;
  ols.kind = ModelKind::OLS;
  CHECK_THROWS_AS(probit_ape_binary(ols, c.scores, 1), Error);
}
