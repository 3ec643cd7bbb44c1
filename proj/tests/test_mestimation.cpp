#include "doctest.h"
#include "support.hpp"

#include "fpc/error.hpp"
#include "fpc/mestimation.hpp"

#include <cmath>

using namespace fpc;
using namespace fpc::testing;

namespace {

struct Regression {
  Matrix design;  // with intercept
  Vector y;
  Vector treat;
};

Regression random_regression(std::uint64_t id, int n = 80, int k = 2) {
  Rng rng(0xBEEF, id, StreamTag::Population);
  Regression r;
  r.design.resize(n, k + 1);
  r.y.resize(n);
  r.treat.resize(n);
  for (int i = 0; i < n; ++i) {
    r.design(i, 0) = 1.0;
    for (int j = 1; j <= k; ++j) r.design(i, j) = rng.normal();
    r.treat(i) = rng.coin() ? 1.0 : 0.0;
    r.y(i) = 0.3 + 0.5 * r.design(i, 1) + rng.normal();
  }
  return r;
}

double total_objective(const Matrix& d, const Vector& y, const Vector& theta) {
  const Vector t = d * theta;
  double q = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) q += probit_unit(t(i), y(i)).q;
  return q;
}

FittedModel probit_at(const Matrix& d, const Vector& y, const Vector& theta) {
  FittedModel m;
  m.kind = ModelKind::Probit;
  m.design = d;
  m.outcome = y;
  m.theta = theta;
  return m;
}

Vector binary_outcome(const Matrix& d, std::uint64_t id) {
  Rng rng(0xB1, id, StreamTag::Assignment);
  Vector y(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    y(i) = rng.uniform() < normal_cdf(0.2 + 0.7 * d(i, 1)) ? 1.0 : 0.0;
  return y;
}

}  // namespace

TEST_CASE("OLS coefficients and scores") {
  for (int id = 0; id < 10; ++id) {
    const Regression r = random_regression(id);
    const FittedModel m = fit_ols(r.design, r.y);
    const Vector ne = (r.design.transpose() * r.design).ldlt().solve(r.design.transpose() * r.y);
    CHECK((m.theta - ne).cwiseAbs().maxCoeff() < 1e-12);
    const ScoreBundle s = ols_scores(m);
    CHECK(s.scores.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.hessian_avg - r.design.transpose() * r.design / 80.0).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("OLS on a binary regressor equals the difference in means") {
  for (int id = 0; id < 20; ++id) {
    const Regression r = random_regression(id, 31 + id);
    double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
    for (Eigen::Index i = 0; i < r.y.size(); ++i) {
      if (r.treat(i) == 1.0) {
        s1 += r.y(i);
        ++n1;
      } else {
        s0 += r.y(i);
        ++n0;
      }
    }
    if (n1 == 0 || n0 == 0) continue;
    const FittedModel m = fit_diff_in_means(r.y, r.treat);
    CHECK(std::abs(m.theta(1) - (s1 / n1 - s0 / n0)) < 1e-12);
    CHECK(std::abs(m.theta(0) - s0 / n0) < 1e-12);
  }
}

TEST_CASE("rank-deficient designs name the collinear column") {
  Regression r = random_regression(3);
  Matrix d(r.design.rows(), 4);
  d << r.design, 2.0 * r.design.col(1);
  try {
    fit_ols(d, r.y, {"(intercept)", "a", "b", "twice_a"});
    FAIL("expected SingularDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularDesign);
  }
  CHECK_THROWS_AS(fit_diff_in_means(r.y, Vector::Constant(r.y.size(), 0.5)), Error);
}

TEST_CASE("probit unit derivatives match finite differences") {
  for (double t : {-7.0, -2.5, -0.3, 0.0, 0.8, 3.0, 6.5}) {
    for (double y : {0.0, 1.0}) {
      const double h = 1e-5;
      const ProbitUnit u = probit_unit(t, y);
      const double dq = (probit_unit(t + h, y).q - probit_unit(t - h, y).q) / (2 * h);
      const double d2q = (probit_unit(t + h, y).dq - probit_unit(t - h, y).dq) / (2 * h);
      CHECK(std::abs(u.dq - dq) <= 1e-6 * std::max(1.0, std::abs(dq)));
      CHECK(std::abs(u.d2q - d2q) <= 1e-4 * std::max(1.0, std::abs(d2q)));
    }
  }
}

TEST_CASE("probit score and Hessian match finite differences of the objective") {
  for (int id = 0; id < 10; ++id) {
    const Regression r = random_regression(id, 60);
    const Vector y = binary_outcome(r.design, id);
    Rng rng(0xAB, id, StreamTag::Sampling);
    Vector theta(r.design.cols());
    for (auto& v : theta) v = 0.5 * rng.normal();
    const ScoreBundle s = probit_scores(probit_at(r.design, y, theta));
    const Vector grad = s.scores.colwise().sum().transpose();
    const double n = static_cast<double>(r.design.rows());
    const double h = 1e-5;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      Vector up = theta, dn = theta;
      up(j) += h;
      dn(j) -= h;
      const double fd = (total_objective(r.design, y, up) - total_objective(r.design, y, dn)) / (2 * h);
      CHECK(std::abs(grad(j) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
      const Vector g_up = probit_scores(probit_at(r.design, y, up)).scores.colwise().sum().transpose();
      const Vector g_dn = probit_scores(probit_at(r.design, y, dn)).scores.colwise().sum().transpose();
      const Vector col = (g_up - g_dn) / (2 * h);
      for (Eigen::Index i = 0; i < theta.size(); ++i)
        CHECK(std::abs(n * s.hessian_avg(i, j) - col(i)) <= 1e-4 * std::max(1.0, std::abs(col(i))));
    }
  }
}

TEST_CASE("probit fit solves the score equation") {
  for (int id = 0; id < 10; ++id) {
    const Regression r = random_regression(id, 200);
    const Vector y = binary_outcome(r.design, id);
    const FittedModel m = fit_probit(r.design, y);
    const ScoreBundle s = probit_scores(m);
    CHECK(s.scores.colwise().mean().cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(m.converged);

    // weighted fit with unit weights is the same estimator
    const Vector w = Vector::Ones(y.size());
    CHECK((fit_probit_weighted(r.design, y, w) - m.theta).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("probit rejects separated and constant outcomes") {
  const Regression r = random_regression(4, 50);
  Vector y(r.design.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = r.design(i, 1) > 0 ? 1.0 : 0.0;
  try {
    fit_probit(r.design, y);
    FAIL("expected Separation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Separation);
  }
  try {
    fit_probit(r.design, Vector::Zero(y.size()));
    FAIL("expected Separation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Separation);
  }
  Vector bad = y;
  bad(0) = 0.5;
  CHECK_THROWS_AS(fit_probit(r.design, bad), Error);
}

TEST_CASE("one-way FE equals the dummy-variable regression") {
  for (int id = 0; id < 10; ++id) {
    const Fixture f = random_fixture(id, 2, 1);
    const Vector x = f.scores.col(0);
    const Vector y = 0.7 * x + f.scores.col(1);
    const FittedModel fe = fit_one_way_fe(y, x, f.clusters);
    const Matrix d = hcat({Matrix(x), dummies(f.clusters.g, f.clusters.n_g, false)});
    const FittedModel dv = fit_ols(d, y);
    CHECK(std::abs(fe.theta(0) - dv.theta(0)) < 1e-10);
  }
}

TEST_CASE("two-way closed form matches the dummy projection on balanced grids") {
  for (int id = 0; id < 10; ++id) {
    Rng rng(0x2F, id, StreamTag::Population);
    const int G = 2 + id % 5, H = 3 + id % 4, per = 1 + id % 3;
    std::vector<int> g, h;
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < H; ++b)
        for (int k = 0; k < per; ++k) {
          g.push_back(a);
          h.push_back(b);
        }
    const ClusterIndex c = from_dense(g, h);
    Vector x(static_cast<Eigen::Index>(g.size()));
    for (auto& v : x) v = rng.normal();
    const Residualized r = twfe_residualize(x, c);
    CHECK(r.closed_form);
    const Matrix d = hcat({dummies(c.g, c.n_g, false), dummies(c.h, c.n_h, true)});
    const Vector expect = x - normal_eq_fit(d, Matrix(x)).col(0);
    CHECK((r.value - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("unbalanced two-way demeaning converges to the dummy projection") {
  for (int id = 0; id < 10; ++id) {
    const Fixture f = random_fixture(id, 1, 1);
    const Residualized r = twfe_residualize(f.scores.col(0), f.clusters);
    CHECK(!r.closed_form);
    const Matrix d = hcat({dummies(f.clusters.g, f.clusters.n_g, false),
                           dummies(f.clusters.h, f.clusters.n_h, true)});
    const Vector expect = f.scores.col(0) - normal_eq_fit(d, f.scores.leftCols(1)).col(0);
    CHECK((r.value - expect).cwiseAbs().maxCoeff() < 1e-8);

    const Vector y = 1.5 * f.scores.col(0) + f.z.col(0);
    const FittedModel fe = fit_two_way_fe(y, f.scores.col(0), f.clusters);
    const FittedModel dv = fit_ols(hcat({f.scores.leftCols(1), d}), y);
    CHECK(std::abs(fe.theta(0) - dv.theta(0)) < 1e-8);
    CHECK(!fe.notes.empty());
  }
}

TEST_CASE("two-way FE rejects a treatment absorbed by the fixed effects") {
  const Fixture f = random_fixture(2, 1, 1);
  Vector x(static_cast<Eigen::Index>(f.clusters.rows()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = f.clusters.g[i] % 2;
  try {
    fit_two_way_fe(f.scores.col(0), x, f.clusters);
    FAIL("expected DegenerateDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDesign);
  }
}

namespace {

TripleDiffPanel random_panel(std::uint64_t id, bool drop_rows) {
  Rng rng(0x3D, id, StreamTag::Population);
  const int G = 4, H = 3, per = 3;
  TripleDiffPanel p;
  std::vector<double> y, d;
  int unit = 0;
  for (int g = 0; g < G; ++g)
    for (int h = 0; h < H; ++h)
      for (int k = 0; k < per; ++k, ++unit) {
        const double fe = rng.normal();
        for (int t = 0; t < 2; ++t) {
          if (drop_rows && rng.uniform() < 0.1) continue;
          const double treat = (g % 2 == 0 && h == 0 && t == 1) ? 1.0 : 0.0;
          y.push_back(fe + 0.4 * g * t - 0.2 * h * t + 0.8 * treat + rng.normal());
          d.push_back(treat);
          p.g.push_back(g);
          p.h.push_back(h);
          p.period.push_back(t);
          p.unit.push_back(unit);
        }
      }
  p.y = Eigen::Map<Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  p.d = Eigen::Map<Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
  return p;
}

}  // namespace

TEST_CASE("triple differences: explicit dummies and absorbed fixed effects agree") {
  for (int id = 0; id < 5; ++id) {
    for (bool drop : {false, true}) {
      const TripleDiffPanel p = random_panel(id, drop);
      const FittedModel dense = fit_triple_diff(p);
      const FittedModel absorbed = fit_triple_diff_absorbed(p);
      CHECK(std::abs(dense.theta(0) - absorbed.theta(0)) < 1e-8);
      CHECK(dense.names.front() == "D");
    }
  }
}

TEST_CASE("balanced two-period triple differences equal the differenced contrast") {
  const TripleDiffPanel p = random_panel(9, false);
  // mean change by (g, h); tau = contrast of treated-vs-control g within h=0
  // relative to the same contrast in h != 0
  double cell[4][3] = {};
  double count[4][3] = {};
  for (std::size_t i = 0; i < p.g.size(); ++i) {
    const double sign = p.period[i] == 1 ? 1.0 : -1.0;
    cell[p.g[i]][p.h[i]] += sign * p.y(static_cast<Eigen::Index>(i));
    count[p.g[i]][p.h[i]] += 0.5;
  }
  auto dy = [&](int g, int h) { return cell[g][h] / count[g][h]; };
  auto gap = [&](int h) { return 0.5 * (dy(0, h) + dy(2, h)) - 0.5 * (dy(1, h) + dy(3, h)); };
  const double expect = gap(0) - 0.5 * (gap(1) + gap(2));
  CHECK(std::abs(fit_triple_diff_absorbed(p).theta(0) - expect) < 1e-10);
}
