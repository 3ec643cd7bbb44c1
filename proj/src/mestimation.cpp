#include "fpc/mestimation.hpp"

#include "fpc/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fpc {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::OLS: return "ols";
    case ModelKind::Probit: return "probit";
    case ModelKind::DiffInMeans: return "diff-in-means";
    case ModelKind::OneWayFE: return "one-way-fe";
    case ModelKind::TwoWayFE: return "two-way-fe";
    case ModelKind::TripleDiff: return "triple-diff";
  }
  return "?";
}

Matrix build_design(const ObservedDataset& data, const RegressorSpec& spec,
                    std::vector<std::string>* names) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  const auto k = static_cast<Eigen::Index>((spec.intercept ? 1 : 0) + spec.x_cols.size() +
                                           spec.z_cols.size());
  Matrix d(n, k);
  std::vector<std::string> labels;
  Eigen::Index j = 0;
  if (spec.intercept) {
    d.col(j++).setOnes();
    labels.push_back("(intercept)");
  }
  auto take = [&](const Matrix& src, const std::vector<std::string>& src_names,
                  const std::vector<int>& cols, const char* prefix) {
    for (int c : cols) {
      if (c < 0 || c >= src.cols())
        throw Error(ErrorCode::Input, std::string("regressor index out of range in ") + prefix);
      d.col(j++) = src.col(c);
      labels.push_back(static_cast<std::size_t>(c) < src_names.size()
                           ? src_names[c]
                           : std::string(prefix) + std::to_string(c));
    }
  };
  take(data.x, data.x_names, spec.x_cols, "x");
  take(data.z, data.z_names, spec.z_cols, "z");
  if (names) *names = std::move(labels);
  return d;
}

namespace {

std::vector<std::string> default_names(Eigen::Index k) {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back("b" + std::to_string(j));
  return out;
}

void check_shapes(const Matrix& design, const Vector& y) {
  if (design.rows() != y.size())
    throw Error(ErrorCode::Input, "design has " + std::to_string(design.rows()) +
                                      " rows but outcome has " + std::to_string(y.size()));
  if (design.rows() == 0) throw Error(ErrorCode::EmptySample, "no observations");
  if (design.rows() < design.cols())
    throw Error(ErrorCode::SingularDesign, "fewer observations than regressors");
}

// Rank check shared by the linear fits; names the columns the pivoted QR
// could not separate from the others.
void require_full_rank(const Matrix& design, const std::vector<std::string>& names) {
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() == design.cols()) return;
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> bad;
  for (Eigen::Index j = qr.rank(); j < design.cols(); ++j) bad.push_back(perm(j));
  std::sort(bad.begin(), bad.end());
  throw Error(ErrorCode::SingularDesign,
              "design matrix is rank deficient; collinear columns: " + join_names(names, bad));
}

Matrix linear_scores(const FittedModel& model, Vector* resid) {
  Vector u = model.outcome - model.design * model.theta;
  Matrix s = model.design.array().colwise() * (-u).array();
  if (resid) *resid = std::move(u);
  return s;
}

}  // namespace

FittedModel fit_ols(const Matrix& design, const Vector& y, std::vector<std::string> names) {
  check_shapes(design, y);
  if (names.empty()) names = default_names(design.cols());
  require_full_rank(design, names);
  FittedModel m;
  m.kind = ModelKind::OLS;
  m.theta = design.colPivHouseholderQr().solve(y);
  m.names = std::move(names);
  m.design = design;
  m.outcome = y;
  return m;
}

FittedModel fit_ols(const ObservedDataset& data, const RegressorSpec& spec) {
  std::vector<std::string> names;
  Matrix d = build_design(data, spec, &names);
  return fit_ols(d, data.y, std::move(names));
}

ScoreBundle ols_scores(const FittedModel& model) {
  ScoreBundle b;
  b.scores = linear_scores(model, nullptr);
  const double n = static_cast<double>(model.design.rows());
  b.hessian_avg = (model.design.transpose() * model.design) / n;
  return b;
}

FittedModel fit_diff_in_means(const Vector& y, const Vector& treatment) {
  for (Eigen::Index i = 0; i < treatment.size(); ++i)
    if (treatment(i) != 0.0 && treatment(i) != 1.0)
      throw Error(ErrorCode::Input, "difference in means needs a binary treatment");
  Matrix d(y.size(), 2);
  d.col(0).setOnes();
  d.col(1) = treatment;
  FittedModel m = fit_ols(d, y, {"(intercept)", "treatment"});
  m.kind = ModelKind::DiffInMeans;
  return m;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

// phi(t) / Phi(t), stable far into the lower tail.
double inverse_mills(double t) {
  if (t > -30.0) return normal_pdf(t) / normal_cdf(t);
  const double t2 = t * t;
  return -t / (1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2));
}

double log_cdf(double t) {
  if (t > -30.0) return std::log(normal_cdf(t));
  return -0.5 * t * t - 0.91893853320467274178 - std::log(inverse_mills(t));
}

}  // namespace

ProbitUnit probit_unit(double index, double y) {
  ProbitUnit u;
  if (y > 0.5) {
    const double lam = inverse_mills(index);
    u.q = -log_cdf(index);
    u.dq = -lam;
    u.d2q = lam * (index + lam);
  } else {
    const double lam = inverse_mills(-index);
    u.q = -log_cdf(-index);
    u.dq = lam;
    u.d2q = lam * (lam - index);
  }
  return u;
}

namespace {

struct NewtonResult {
  Vector theta;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  double max_index = 0.0;
  double objective = 0.0;
};

double probit_objective(const Matrix& d, const Vector& y, const Vector* w, const Vector& theta) {
  Vector t = d * theta;
  double q = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i)
    q += (w ? (*w)(i) : 1.0) * probit_unit(t(i), y(i)).q;
  return q;
}

NewtonResult probit_newton(const Matrix& d, const Vector& y, const Vector* w,
                           const ProbitOptions& options) {
  const Eigen::Index n = d.rows();
  const Eigen::Index k = d.cols();
  const double total_weight = w ? w->sum() : static_cast<double>(n);
  NewtonResult r;
  r.theta = Vector::Zero(k);
  double q = probit_objective(d, y, w, r.theta);
  for (int iter = 0; iter <= options.max_iter; ++iter) {
    Vector t = d * r.theta;
    Vector grad = Vector::Zero(k);
    Matrix hess = Matrix::Zero(k, k);
    Vector dq(n), d2q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const ProbitUnit u = probit_unit(t(i), y(i));
      const double wi = w ? (*w)(i) : 1.0;
      dq(i) = wi * u.dq;
      d2q(i) = wi * u.d2q;
    }
    grad = d.transpose() * dq;
    hess.selfadjointView<Eigen::Lower>().rankUpdate(
        (d.array().colwise() * d2q.array().sqrt()).matrix().transpose());
    hess = hess.selfadjointView<Eigen::Lower>();
    r.iterations = iter;
    r.grad_norm = grad.cwiseAbs().maxCoeff() / total_weight;
    r.max_index = t.size() ? t.cwiseAbs().maxCoeff() : 0.0;
    r.objective = q;
    if (r.grad_norm <= options.tol) {
      r.converged = true;
      return r;
    }
    if (iter == options.max_iter) break;
    Eigen::LDLT<Matrix> ldlt(hess);
    Vector step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) break;
    double scale = 1.0;
    Vector next = r.theta - step;
    double q_next = probit_objective(d, y, w, next);
    const double slack = 1e-12 * (1.0 + std::abs(q));
    int halvings = 0;
    while (!(q_next <= q + slack) && halvings < 40) {
      scale *= 0.5;
      next = r.theta - scale * step;
      q_next = probit_objective(d, y, w, next);
      ++halvings;
    }
    if (!(q_next <= q + slack)) break;
    r.theta = next;
    q = q_next;
  }
  return r;
}

void check_binary(const Vector& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0)
      throw Error(ErrorCode::Input, "probit outcome must be 0/1 (row " + std::to_string(i + 1) + ")");
}

[[noreturn]] void probit_failure(const NewtonResult& r, double total_weight) {
  std::ostringstream msg;
  msg.precision(3);
  if (r.max_index > 30.0 || r.objective / total_weight < 1e-12) {
    msg << "probit likelihood has no finite maximum (separation); max |index| = "
        << r.max_index << ", gradient norm " << r.grad_norm;
    throw Error(ErrorCode::Separation, msg.str());
  }
  msg << "probit Newton iterations did not converge after " << r.iterations
      << " steps; final mean-score norm " << r.grad_norm;
  throw Error(ErrorCode::NonConvergence, msg.str());
}

}  // namespace

FittedModel fit_probit(const Matrix& design, const Vector& y, std::vector<std::string> names,
                       const ProbitOptions& options) {
  check_shapes(design, y);
  check_binary(y);
  if (names.empty()) names = default_names(design.cols());
  const double ybar = y.mean();
  if (ybar == 0.0 || ybar == 1.0)
    throw Error(ErrorCode::Separation,
                std::string("probit outcome is constant (all ") + (ybar == 0.0 ? "0" : "1") +
                    "); the intercept diverges");
  require_full_rank(design, names);
  NewtonResult r = probit_newton(design, y, nullptr, options);
  if (!r.converged) probit_failure(r, static_cast<double>(design.rows()));
  // The score can fall below tolerance while the index still runs off to
  // infinity. A fit that classifies every row correctly means the data are
  // completely separated, so no finite maximum exists.
  const Vector signed_index = (design * r.theta).cwiseProduct((2.0 * y.array() - 1.0).matrix());
  if (signed_index.minCoeff() > 0.0) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "probit likelihood has no finite maximum (separation): the regressors classify "
           "every outcome correctly; max |index| = "
        << r.max_index;
    throw Error(ErrorCode::Separation, msg.str());
  }
  FittedModel m;
  m.kind = ModelKind::Probit;
  m.theta = r.theta;
  m.iterations = r.iterations;
  m.converged = true;
  m.names = std::move(names);
  m.design = design;
  m.outcome = y;
  if (r.max_index > 8.0) {
    std::ostringstream note;
    note << "some fitted probabilities are within 1e-15 of 0 or 1 (max |index| = " << r.max_index
         << ")";
    m.notes.push_back(note.str());
  }
  return m;
}

FittedModel fit_probit(const ObservedDataset& data, const RegressorSpec& spec,
                       const ProbitOptions& options) {
  std::vector<std::string> names;
  Matrix d = build_design(data, spec, &names);
  return fit_probit(d, data.y, std::move(names), options);
}

Vector fit_probit_weighted(const Matrix& design, const Vector& y, const Vector& weights,
                           const ProbitOptions& options) {
  check_shapes(design, y);
  check_binary(y);
  if (weights.size() != y.size() || (weights.array() < 0.0).any())
    throw Error(ErrorCode::Input, "probit weights must be nonnegative, one per row");
  NewtonResult r = probit_newton(design, y, &weights, options);
  if (!r.converged) probit_failure(r, weights.sum());
  return r.theta;
}

ScoreBundle probit_scores(const FittedModel& model) {
  const Matrix& d = model.design;
  const Eigen::Index n = d.rows();
  Vector t = d * model.theta;
  Vector dq(n), d2q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ProbitUnit u = probit_unit(t(i), model.outcome(i));
    dq(i) = u.dq;
    d2q(i) = u.d2q;
  }
  ScoreBundle b;
  b.scores = d.array().colwise() * dq.array();
  b.hessian_avg = (d.transpose() * (d.array().colwise() * d2q.array()).matrix()) / double(n);
  b.hessian_avg = symmetrize(b.hessian_avg);
  return b;
}

namespace {

Vector group_means(const Vector& x, const std::vector<int>& ids, int count) {
  Vector sum = Vector::Zero(count);
  Vector n = Vector::Zero(count);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum(ids[i]) += x(i);
    n(ids[i]) += 1.0;
  }
  return sum.cwiseQuotient(n);
}

Vector demean(const Vector& x, const std::vector<int>& ids, int count) {
  const Vector means = group_means(x, ids, count);
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i) - means(ids[i]);
  return out;
}

double scale_of(const Vector& x) { return std::max(1.0, x.cwiseAbs().maxCoeff()); }

FittedModel projected_fit(ModelKind kind, Vector xt, Vector yt, const Vector& x,
                          const std::string& what) {
  const double den = xt.dot(x);
  if (std::abs(den) <= 1e-12 * scale_of(x) * scale_of(x) * double(x.size()))
    throw Error(ErrorCode::DegenerateDesign,
                what + ": treatment has no variation left after removing fixed effects");
  FittedModel m;
  m.kind = kind;
  m.theta = Vector::Constant(1, xt.dot(yt) / den);
  m.names = {"treatment"};
  m.design = Matrix(std::move(xt));
  m.outcome = std::move(yt);
  return m;
}

}  // namespace

FittedModel fit_one_way_fe(const Vector& y, const Vector& x, const ClusterIndex& clusters,
                           Dimension dim) {
  if (y.size() != x.size() || static_cast<std::size_t>(y.size()) != clusters.rows())
    throw Error(ErrorCode::Input, "one-way FE inputs differ in length");
  if (dim == Dimension::Intersection)
    throw Error(ErrorCode::Input, "one-way FE takes the G or H dimension");
  const auto& ids = clusters.ids(dim);
  const int count = clusters.count(dim);
  return projected_fit(ModelKind::OneWayFE, demean(x, ids, count), demean(y, ids, count), x,
                       "one-way fixed effects");
}

Vector owfe_weights(const ClusterIndex& clusters, double mu_a, double mu_b) {
  if (mu_a < 0.0 || mu_a > 1.0 || mu_b < 0.0 || mu_b > 1.0)
    throw Error(ErrorCode::Input, "assignment probabilities must lie in [0, 1]");
  Vector w(static_cast<Eigen::Index>(clusters.rows()));
  for (std::size_t i = 0; i < clusters.rows(); ++i) {
    const double mg = clusters.size_g[clusters.g[i]];
    const double mc = clusters.size_cell[clusters.cell[i]];
    w(static_cast<Eigen::Index>(i)) = mu_a * mu_b * (1.0 - (mc + (mg - mc) * mu_b) / mg);
  }
  return w;
}

bool is_balanced_grid(const ClusterIndex& clusters) {
  if (clusters.rows() == 0) return false;
  if (static_cast<long>(clusters.n_cells) != static_cast<long>(clusters.n_g) * clusters.n_h)
    return false;
  const int k = clusters.size_cell.front();
  return std::all_of(clusters.size_cell.begin(), clusters.size_cell.end(),
                     [k](int s) { return s == k; });
}

namespace {

// Alternating projections onto the orthogonal complements of the dummy
// sets; converges to the residual of the joint dummy regression.
Vector alternating_residual(const Vector& x, const std::vector<const std::vector<int>*>& ids,
                            const std::vector<int>& counts) {
  Vector r = x;
  const double tol = 1e-14 * scale_of(x);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    Vector before = r;
    for (std::size_t s = 0; s < ids.size(); ++s) r = demean(r, *ids[s], counts[s]);
    if ((r - before).cwiseAbs().maxCoeff() <= tol) break;
  }
  return r;
}

}  // namespace

Residualized twfe_residualize(const Vector& x, const ClusterIndex& clusters) {
  if (static_cast<std::size_t>(x.size()) != clusters.rows())
    throw Error(ErrorCode::Input, "column length does not match the cluster index");
  Residualized out;
  if (is_balanced_grid(clusters)) {
    const Vector mg = group_means(x, clusters.g, clusters.n_g);
    const Vector mh = group_means(x, clusters.h, clusters.n_h);
    const double m = x.mean();
    out.value.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      out.value(i) = x(i) - mg(clusters.g[i]) - mh(clusters.h[i]) + m;
    out.closed_form = true;
  } else {
    out.value = alternating_residual(x, {&clusters.g, &clusters.h}, {clusters.n_g, clusters.n_h});
    out.closed_form = false;
  }
  return out;
}

FittedModel fit_two_way_fe(const Vector& y, const Vector& x, const ClusterIndex& clusters) {
  if (y.size() != x.size())
    throw Error(ErrorCode::Input, "two-way FE inputs differ in length");
  Residualized rx = twfe_residualize(x, clusters);
  Residualized ry = twfe_residualize(y, clusters);
  FittedModel m = projected_fit(ModelKind::TwoWayFE, std::move(rx.value), std::move(ry.value), x,
                                "two-way fixed effects");
  if (!rx.closed_form)
    m.notes.push_back("unbalanced grid: two-way demeaning by iterated projections, "
                      "closed-form transform not used");
  return m;
}

namespace {

struct PanelKeys {
  std::vector<int> gh, ht, gt;
  int n_gh = 0, n_ht = 0, n_gt = 0;
  int G = 0, H = 0, T = 0;
};

std::vector<int> dense_pairs(const std::vector<int>& a, const std::vector<int>& b, int& count) {
  std::map<std::pair<int, int>, int> ids;
  for (std::size_t i = 0; i < a.size(); ++i) ids.emplace(std::make_pair(a[i], b[i]), 0);
  int next = 0;
  for (auto& [key, id] : ids) id = next++;
  count = next;
  std::vector<int> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ids.at({a[i], b[i]});
  return out;
}

PanelKeys panel_keys(const TripleDiffPanel& p) {
  const std::size_t n = static_cast<std::size_t>(p.y.size());
  if (p.d.size() != p.y.size() || p.g.size() != n || p.h.size() != n || p.period.size() != n)
    throw Error(ErrorCode::Input, "triple-differences panel columns differ in length");
  PanelKeys k;
  k.G = *std::max_element(p.g.begin(), p.g.end()) + 1;
  k.H = *std::max_element(p.h.begin(), p.h.end()) + 1;
  k.T = *std::max_element(p.period.begin(), p.period.end()) + 1;
  if (k.T < 2) throw Error(ErrorCode::Input, "triple differences need at least two periods");
  k.gh = dense_pairs(p.g, p.h, k.n_gh);
  k.ht = dense_pairs(p.h, p.period, k.n_ht);
  k.gt = dense_pairs(p.g, p.period, k.n_gt);
  return k;
}

bool balanced_panel(const TripleDiffPanel& p, const PanelKeys& k) {
  if (static_cast<long>(k.n_gh) != static_cast<long>(k.G) * k.H) return false;
  std::map<std::tuple<int, int, int>, int> counts;
  for (std::size_t i = 0; i < p.g.size(); ++i) ++counts[{p.g[i], p.h[i], p.period[i]}];
  if (static_cast<long>(counts.size()) != static_cast<long>(k.G) * k.H * k.T) return false;
  const int c = counts.begin()->second;
  for (const auto& [key, v] : counts)
    if (v != c) return false;
  return true;
}

// Residual on alpha_gh + gamma_ht + delta_gt for a balanced panel.
Vector triple_residual_balanced(const Vector& x, const TripleDiffPanel& p, const PanelKeys& k) {
  std::vector<int> g_only(p.g), h_only(p.h), t_only(p.period);
  const Vector m_gh = group_means(x, k.gh, k.n_gh);
  const Vector m_ht = group_means(x, k.ht, k.n_ht);
  const Vector m_gt = group_means(x, k.gt, k.n_gt);
  const Vector m_g = group_means(x, g_only, k.G);
  const Vector m_h = group_means(x, h_only, k.H);
  const Vector m_t = group_means(x, t_only, k.T);
  const double m = x.mean();
  Vector r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    r(i) = x(i) - m_gh(k.gh[i]) - m_ht(k.ht[i]) - m_gt(k.gt[i]) + m_g(p.g[i]) + m_h(p.h[i]) +
           m_t(p.period[i]) - m;
  return r;
}

}  // namespace

FittedModel fit_triple_diff(const TripleDiffPanel& panel) {
  const PanelKeys k = panel_keys(panel);
  const Eigen::Index n = panel.y.size();
  const Eigen::Index cols = 2 + (k.n_gh - 1) + (k.n_ht - 1) + (k.n_gt - 1);
  if (static_cast<double>(n) * static_cast<double>(cols) > 2e7) {
    FittedModel m = fit_triple_diff_absorbed(panel);
    m.notes.push_back("panel too large for explicit dummies; fixed effects absorbed");
    return m;
  }
  Matrix d = Matrix::Zero(n, cols);
  std::vector<std::string> names = {"D", "(intercept)"};
  d.col(0) = panel.d;
  d.col(1).setOnes();
  Eigen::Index off = 2;
  auto add_set = [&](const std::vector<int>& ids, int count, const std::string& label) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (ids[i] > 0) d(i, off + ids[i] - 1) = 1.0;
    for (int c = 1; c < count; ++c) names.push_back(label + "[" + std::to_string(c) + "]");
    off += count - 1;
  };
  add_set(k.gh, k.n_gh, "alpha_gh");
  add_set(k.ht, k.n_ht, "gamma_ht");
  add_set(k.gt, k.n_gt, "delta_gt");

  // The three dummy sets overlap (each pair shares a main effect), so
  // redundant dummy columns are dropped by pivoted QR. D must survive.
  Eigen::ColPivHouseholderQR<Matrix> qr(d);
  qr.setThreshold(1e-10);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<int> keep;
  for (Eigen::Index j = 0; j < qr.rank(); ++j) keep.push_back(perm(j));
  std::sort(keep.begin(), keep.end());
  if (keep.empty() || keep.front() != 0)
    throw Error(ErrorCode::SingularDesign,
                "treatment indicator D is collinear with the fixed-effect dummies");
  Matrix reduced(n, static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> kept_names;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    reduced.col(j) = d.col(keep[j]);
    kept_names.push_back(names[keep[j]]);
  }
  FittedModel m = fit_ols(reduced, panel.y, std::move(kept_names));
  m.kind = ModelKind::TripleDiff;
  const Eigen::Index dropped = cols - static_cast<Eigen::Index>(keep.size());
  if (dropped > 0)
    m.notes.push_back(std::to_string(dropped) + " redundant fixed-effect dummies dropped");
  return m;
}

FittedModel fit_triple_diff_absorbed(const TripleDiffPanel& panel) {
  const PanelKeys k = panel_keys(panel);
  Vector rd, ry;
  bool closed = balanced_panel(panel, k);
  if (closed) {
    rd = triple_residual_balanced(panel.d, panel, k);
    ry = triple_residual_balanced(panel.y, panel, k);
  } else {
    std::vector<const std::vector<int>*> ids = {&k.gh, &k.ht, &k.gt};
    std::vector<int> counts = {k.n_gh, k.n_ht, k.n_gt};
    rd = alternating_residual(panel.d, ids, counts);
    ry = alternating_residual(panel.y, ids, counts);
  }
  FittedModel m = projected_fit(ModelKind::TripleDiff, std::move(rd), std::move(ry), panel.d,
                                "triple differences");
  m.names = {"D"};
  if (!closed) m.notes.push_back("unbalanced panel: fixed effects removed by iterated projections");
  return m;
}

ScoreBundle generic_scores(const FittedModel& model) {
  switch (model.kind) {
    case ModelKind::Probit: return probit_scores(model);
    case ModelKind::OLS:
    case ModelKind::DiffInMeans:
    case ModelKind::OneWayFE:
    case ModelKind::TwoWayFE:
    case ModelKind::TripleDiff: return ols_scores(model);
  }
  return ols_scores(model);
}

}  // namespace fpc
