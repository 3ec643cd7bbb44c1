#pragma once

#include "fpc/data_model.hpp"

#include <string>
#include <vector>

namespace fpc {

enum class ModelKind { OLS, Probit, DiffInMeans, OneWayFE, TwoWayFE, TripleDiff };

const char* to_string(ModelKind kind);

// Which dataset columns enter the regression, in order:
// [intercept] x-columns z-columns.
struct RegressorSpec {
  bool intercept = true;
  std::vector<int> x_cols;
  std::vector<int> z_cols;
};

// The estimator keeps the (possibly transformed) design and outcome it was
// fitted on so scores can be produced without the original dataset. For the
// fixed-effects kinds `design` is the single residualized treatment column
// and `outcome` the residualized outcome.
struct FittedModel {
  Vector theta;
  ModelKind kind = ModelKind::OLS;
  bool converged = true;
  int iterations = 0;
  std::vector<std::string> names;
  Matrix design;
  Vector outcome;
  std::vector<std::string> notes;
};

// m_i is the gradient of the unit objective q_i at theta-hat, so the sample
// mean of the scores is zero and the Hessian average is positive definite
// for least squares and probit.
struct ScoreBundle {
  Matrix scores;       // n x k
  Matrix hessian_avg;  // k x k

  std::size_t rows() const { return static_cast<std::size_t>(scores.rows()); }
};

Matrix build_design(const ObservedDataset& data, const RegressorSpec& spec,
                    std::vector<std::string>* names = nullptr);

FittedModel fit_ols(const Matrix& design, const Vector& y,
                    std::vector<std::string> names = {});
FittedModel fit_ols(const ObservedDataset& data, const RegressorSpec& spec);
ScoreBundle ols_scores(const FittedModel& model);

// Regression of y on an intercept and a binary treatment.
FittedModel fit_diff_in_means(const Vector& y, const Vector& treatment);

struct ProbitOptions {
  int max_iter = 100;
  double tol = 1e-8;
};

FittedModel fit_probit(const Matrix& design, const Vector& y,
                       std::vector<std::string> names = {},
                       const ProbitOptions& options = {});
FittedModel fit_probit(const ObservedDataset& data, const RegressorSpec& spec,
                       const ProbitOptions& options = {});
// Weighted log-likelihood; used for the population estimand where each unit
// contributes one row per assignment value weighted by its probability.
Vector fit_probit_weighted(const Matrix& design, const Vector& y,
                           const Vector& weights,
                           const ProbitOptions& options = {});
ScoreBundle probit_scores(const FittedModel& model);

// Per-unit probit objective (negative log-likelihood) and its derivatives
// with respect to the linear index.
struct ProbitUnit {
  double q = 0.0;
  double dq = 0.0;
  double d2q = 0.0;
};
ProbitUnit probit_unit(double index, double y);

double normal_cdf(double x);
double normal_pdf(double x);

// Within-cluster (one-way fixed effects) ratio estimator.
FittedModel fit_one_way_fe(const Vector& y, const Vector& x,
                           const ClusterIndex& clusters,
                           Dimension dim = Dimension::G);

// Weights of the one-way FE estimand under binary product assignment with
// P(A_g = 1) = mu_a and P(B_h = 1) = mu_b.
Vector owfe_weights(const ClusterIndex& clusters, double mu_a, double mu_b);

struct Residualized {
  Vector value;
  bool closed_form = false;  // false: iterative two-way projection was used
};

bool is_balanced_grid(const ClusterIndex& clusters);

// Residual of x on full G and H dummy sets. Balanced grids use the closed
// form x - xbar_g - xbar_h + xbar; otherwise alternating projections.
Residualized twfe_residualize(const Vector& x, const ClusterIndex& clusters);

FittedModel fit_two_way_fe(const Vector& y, const Vector& x,
                           const ClusterIndex& clusters);

// Triple-differences panel: one row per unit-period.
struct TripleDiffPanel {
  Vector y;
  Vector d;                 // treatment indicator D = D_g * D_h * Post
  std::vector<int> g;       // dense group labels
  std::vector<int> h;       // dense stratum labels
  std::vector<int> period;  // dense 0..T-1
  std::vector<int> unit;    // dense unit labels
};

// OLS of y on D and the alpha_gh, gamma_ht, delta_gt dummy sets with the
// first level of each set dropped. theta(0) is tau-hat; design holds all
// regressors.
FittedModel fit_triple_diff(const TripleDiffPanel& panel);

// Same estimator by projection: residualizes D and y on the three dummy
// sets (closed form for balanced complete panels) and keeps only the tau
// coordinate, so scores are for tau alone.
FittedModel fit_triple_diff_absorbed(const TripleDiffPanel& panel);

// Scores for any fitted model.
ScoreBundle generic_scores(const FittedModel& model);

}  // namespace fpc
