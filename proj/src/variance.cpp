#include "fpc/variance.hpp"

#include "fpc/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpc {

const char* to_string(MeatKind kind) {
  switch (kind) {
    case MeatKind::EHW: return "ehw";
    case MeatKind::ClusterG: return "cluster-g";
    case MeatKind::ClusterH: return "cluster-h";
    case MeatKind::Intersection: return "cluster-gh";
    case MeatKind::ShrinkZ: return "shrink-z";
    case MeatKind::ShrinkZCE: return "shrink-z-ce";
    case MeatKind::ShrinkZGE: return "shrink-z-ge";
    case MeatKind::ShrinkZHE: return "shrink-z-he";
    case MeatKind::Combined: return "combined";
  }
  return "?";
}

const char* to_string(Family family) {
  switch (family) {
    case Family::EHW: return "ehw";
    case Family::LZ_OneWay: return "lz";
    case Family::CGM: return "cgm";
    case Family::CGM2: return "cgm2";
    case Family::AdjOneWay: return "adj-oneway";
    case Family::AdjTwoWay: return "adj-twoway";
    case Family::AdjCGM: return "adj-cgm";
  }
  return "?";
}

MeatMatrix meat_ehw(const Matrix& scores) {
  const double n = static_cast<double>(scores.rows());
  if (scores.rows() == 0) throw Error(ErrorCode::EmptySample, "no scores");
  MeatMatrix m;
  m.kind = MeatKind::EHW;
  m.divisor = n;
  m.value = Matrix::Zero(scores.cols(), scores.cols());
  m.value.selfadjointView<Eigen::Lower>().rankUpdate(scores.transpose());
  m.value = Matrix(m.value.selfadjointView<Eigen::Lower>()) / n;
  return m;
}

Matrix cluster_sums(const Matrix& rows, const std::vector<int>& ids, int n_clusters) {
  if (static_cast<std::size_t>(rows.rows()) != ids.size())
    throw Error(ErrorCode::Input, "cluster labels do not match the score rows");
  Matrix sums = Matrix::Zero(n_clusters, rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) sums.row(ids[i]) += rows.row(i);
  return sums;
}

Matrix cluster_outer(const Matrix& scores, const ClusterIndex& clusters, Dimension dim) {
  const Matrix s = cluster_sums(scores, clusters.ids(dim), clusters.count(dim));
  Matrix out = Matrix::Zero(scores.cols(), scores.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(s.transpose());
  return Matrix(out.selfadjointView<Eigen::Lower>()) / static_cast<double>(scores.rows());
}

MeatMatrix meat_cluster(const Matrix& scores, const ClusterIndex& clusters, Dimension dim) {
  MeatMatrix m;
  switch (dim) {
    case Dimension::G: m.kind = MeatKind::ClusterG; break;
    case Dimension::H: m.kind = MeatKind::ClusterH; break;
    case Dimension::Intersection: m.kind = MeatKind::Intersection; break;
  }
  m.divisor = static_cast<double>(scores.rows());
  m.value = cluster_outer(scores, clusters, dim) - meat_ehw(scores).value;
  return m;
}

namespace {

void fill_se(VarianceReport& r) {
  const Eigen::Index k = r.V.rows();
  r.se.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = r.V(j, j);
    if (v < 0.0 || !std::isfinite(v)) {
      r.se(j) = std::numeric_limits<double>::quiet_NaN();
      if (v < 0.0) r.negative_variance = true;
    } else {
      r.se(j) = std::sqrt(v / static_cast<double>(r.n));
    }
  }
  if (r.negative_variance) r.notes.push_back("negative variance on the diagonal; se set to NaN");
}

}  // namespace

VarianceReport sandwich(const Matrix& meat, const Matrix& hessian_avg, std::size_t n) {
  const Eigen::Index k = hessian_avg.rows();
  if (hessian_avg.cols() != k || meat.rows() != k || meat.cols() != k)
    throw Error(ErrorCode::Input, "meat and Hessian dimensions disagree");
  Eigen::FullPivLU<Matrix> lu(hessian_avg);
  if (!lu.isInvertible()) {
    std::ostringstream msg;
    msg << "Hessian average is singular (condition number " << condition_number(hessian_avg)
        << ")";
    throw Error(ErrorCode::SingularHessian, msg.str());
  }
  const double cond = condition_number(hessian_avg);
  if (!(cond < 1e14)) {
    std::ostringstream msg;
    msg << "Hessian average is numerically singular (condition number " << cond << ")";
    throw Error(ErrorCode::SingularHessian, msg.str());
  }
  // V = L^{-1} meat L^{-T} via two solves.
  const Matrix left = lu.solve(meat);
  const Matrix v = lu.solve(left.transpose()).transpose();
  VarianceReport r;
  r.V = symmetrize(v);
  r.n = n;
  fill_se(r);
  return r;
}

VarianceReport direct_report(const Matrix& meat, std::size_t n) {
  VarianceReport r;
  r.V = symmetrize(meat);
  r.n = n;
  fill_se(r);
  return r;
}

double oneway_dof(const ClusterIndex& clusters, Dimension dim) {
  return std::max(1, clusters.count(dim) - 1);
}

double twoway_dof(const ClusterIndex& clusters) {
  return std::max(1, std::min(clusters.n_g, clusters.n_h) - 1);
}

namespace {

double small_sample_factor(std::size_t n, Eigen::Index k, int clusters) {
  const double nn = static_cast<double>(n);
  const double g = clusters;
  if (clusters < 2 || nn <= static_cast<double>(k)) return 1.0;
  return g / (g - 1.0) * (nn - 1.0) / (nn - static_cast<double>(k));
}

VarianceReport finish(const Matrix& meat, const Matrix& hessian_avg, std::size_t n, Family family,
                      double dof, double factor) {
  VarianceReport r = sandwich(meat * factor, hessian_avg, n);
  r.family = family;
  r.dof = dof;
  if (factor != 1.0) r.notes.push_back("small-sample multiplier applied");
  return r;
}

}  // namespace

Matrix lz_meat(const Matrix& scores, const ClusterIndex& clusters, Dimension dim) {
  return cluster_outer(scores, clusters, dim);
}

Matrix cgm_meat(const Matrix& scores, const ClusterIndex& clusters) {
  return cluster_outer(scores, clusters, Dimension::G) + cluster_outer(scores, clusters, Dimension::H) -
         cluster_outer(scores, clusters, Dimension::Intersection);
}

Matrix cgm2_meat(const Matrix& scores, const ClusterIndex& clusters) {
  return cluster_outer(scores, clusters, Dimension::G) + cluster_outer(scores, clusters, Dimension::H);
}

VarianceReport v_ehw(const Matrix& scores, const Matrix& hessian_avg, const VarianceOptions& options) {
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const double nn = static_cast<double>(n);
  const auto k = scores.cols();
  const double factor =
      options.small_sample && nn > static_cast<double>(k) ? nn / (nn - static_cast<double>(k)) : 1.0;
  const double dof = nn > static_cast<double>(k) ? nn - static_cast<double>(k) : kInfiniteDof;
  return finish(meat_ehw(scores).value, hessian_avg, n, Family::EHW, dof, factor);
}

VarianceReport v_lz_oneway(const Matrix& scores, const Matrix& hessian_avg,
                           const ClusterIndex& clusters, Dimension dim,
                           const VarianceOptions& options) {
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const double factor =
      options.small_sample ? small_sample_factor(n, scores.cols(), clusters.count(dim)) : 1.0;
  VarianceReport r = finish(lz_meat(scores, clusters, dim), hessian_avg, n, Family::LZ_OneWay,
                            oneway_dof(clusters, dim), factor);
  r.dim = dim;
  return r;
}

VarianceReport v_cgm(const Matrix& scores, const Matrix& hessian_avg, const ClusterIndex& clusters,
                     const VarianceOptions& options) {
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const int c = std::min(clusters.n_g, clusters.n_h);
  const double factor = options.small_sample ? small_sample_factor(n, scores.cols(), c) : 1.0;
  return finish(cgm_meat(scores, clusters), hessian_avg, n, Family::CGM, twoway_dof(clusters),
                factor);
}

VarianceReport v_cgm2(const Matrix& scores, const Matrix& hessian_avg, const ClusterIndex& clusters,
                      const VarianceOptions& options) {
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const int c = std::min(clusters.n_g, clusters.n_h);
  const double factor = options.small_sample ? small_sample_factor(n, scores.cols(), c) : 1.0;
  return finish(cgm2_meat(scores, clusters), hessian_avg, n, Family::CGM2, twoway_dof(clusters),
                factor);
}

double critical_value(double dof, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::Input, "quantile level must lie in (0, 1)");
  if (std::isnan(dof) || dof < 1.0)
    throw Error(ErrorCode::Input, "degrees of freedom must be at least 1");
  if (std::isinf(dof)) return boost::math::quantile(boost::math::normal_distribution<>(), level);
  return boost::math::quantile(boost::math::students_t_distribution<>(dof), level);
}

}  // namespace fpc
