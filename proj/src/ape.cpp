#include "fpc/ape.hpp"

#include "fpc/error.hpp"

#include <Eigen/LU>

namespace fpc {

namespace {

// psi = w (f - gamma) - m L^{-1} F', with w = N / N_1 on the averaging set.
Matrix residuals(const Matrix& f, const Vector& gamma, const Matrix& F, const ScoreBundle& s,
                 const std::vector<bool>& in_set, double weight) {
  Eigen::FullPivLU<Matrix> lu(s.hessian_avg);
  if (!lu.isInvertible())
    throw Error(ErrorCode::SingularHessian, "Hessian average is singular; APE residuals undefined");
  const Matrix a = lu.solve(F.transpose());  // k x q
  Matrix psi = -(s.scores * a);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    if (in_set[i]) psi.row(i) += weight * (f.row(i) - gamma.transpose());
  return psi;
}

}  // namespace

ApeResult probit_ape_binary(const FittedModel& model, const ScoreBundle& scores, int treatment_col,
                            bool treated_only) {
  if (model.kind != ModelKind::Probit)
    throw Error(ErrorCode::Input, "probability-difference APE needs a probit fit");
  const Matrix& d = model.design;
  if (treatment_col < 0 || treatment_col >= d.cols())
    throw Error(ErrorCode::Input, "treatment column out of range");
  const Eigen::Index n = d.rows();
  const Eigen::Index k = d.cols();
  std::vector<bool> in_set(n, true);
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = d(i, treatment_col);
    if (x != 0.0 && x != 1.0)
      throw Error(ErrorCode::Input, "APE treatment column must be 0/1");
    if (treated_only) in_set[i] = x == 1.0;
    if (in_set[i]) ++n1;
  }
  if (n1 == 0) throw Error(ErrorCode::EmptySample, "no treated rows to average over");

  Matrix d1 = d, d0 = d;
  d1.col(treatment_col).setOnes();
  d0.col(treatment_col).setZero();
  const Vector t1 = d1 * model.theta;
  const Vector t0 = d0 * model.theta;

  ApeResult r;
  r.f.resize(n, 1);
  Matrix grad_sum = Matrix::Zero(1, k);
  double f_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.f(i, 0) = normal_cdf(t1(i)) - normal_cdf(t0(i));
    if (!in_set[i]) continue;
    f_sum += r.f(i, 0);
    grad_sum += normal_pdf(t1(i)) * d1.row(i) - normal_pdf(t0(i)) * d0.row(i);
  }
  r.gamma = Vector::Constant(1, f_sum / double(n1));
  r.F_hat = grad_sum / double(n1);
  r.psi = residuals(r.f, r.gamma, r.F_hat, scores, in_set, double(n) / double(n1));
  return r;
}

ApeResult generic_ape(const FittedModel& model, const ScoreBundle& scores, const ApeFunction& fn) {
  if (!fn.f || !fn.grad) throw Error(ErrorCode::Input, "APE function and gradient are required");
  ApeResult r;
  r.f = fn.f(model.theta);
  const Eigen::Index n = r.f.rows();
  if (n != scores.scores.rows())
    throw Error(ErrorCode::Input, "APE function returned the wrong number of rows");
  r.gamma = r.f.colwise().mean().transpose();
  r.F_hat = Matrix::Zero(r.f.cols(), model.theta.size());
  for (Eigen::Index i = 0; i < n; ++i) r.F_hat += fn.grad(model.theta, static_cast<int>(i));
  r.F_hat /= double(n);
  r.psi = residuals(r.f, r.gamma, r.F_hat, scores, std::vector<bool>(n, true), 1.0);
  return r;
}

VarianceReport ape_variance(const ApeResult& ape, const ClusterIndex& clusters,
                            const ApeVarianceRequest& request) {
  const Matrix& psi = ape.psi;
  const std::size_t n = static_cast<std::size_t>(psi.rows());
  if (clusters.rows() != n)
    throw Error(ErrorCode::Input, "APE residuals and cluster labels differ in length");
  auto need_inputs = [&]() -> AdjustmentInputs {
    if (!request.shrink) throw Error(ErrorCode::Input, "adjusted APE variance needs attributes");
    return ape_adjusted_inputs(psi, *request.shrink);
  };
  VarianceReport r;
  switch (request.family) {
    case Family::EHW:
      r = direct_report(meat_ehw(psi).value, n);
      r.dof = n > 1 ? double(n - 1) : kInfiniteDof;
      break;
    case Family::LZ_OneWay:
      r = direct_report(lz_meat(psi, clusters, request.dim), n);
      r.dim = request.dim;
      r.dof = oneway_dof(clusters, request.dim);
      break;
    case Family::CGM:
      r = direct_report(cgm_meat(psi, clusters), n);
      r.dof = twoway_dof(clusters);
      break;
    case Family::CGM2:
      r = direct_report(cgm2_meat(psi, clusters), n);
      r.dof = twoway_dof(clusters);
      break;
    case Family::AdjOneWay:
      return adjusted_oneway(need_inputs(), request.case_id, request.dim, Matrix()).report;
    case Family::AdjTwoWay:
      return adjusted_twoway(need_inputs(), request.case_id, Matrix()).report;
    case Family::AdjCGM:
      return adjusted_cgm(need_inputs(), Matrix()).report;
  }
  r.family = request.family;
  return r;
}

}  // namespace fpc
