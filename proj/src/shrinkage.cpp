#include "fpc/shrinkage.hpp"

#include "fpc/error.hpp"

#include <sstream>

namespace fpc {

namespace {

Matrix with_intercept(const Matrix& z, const ProjectionOptions& options) {
  if (!options.prepend_intercept) return z;
  Matrix out(z.rows(), z.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(z.cols()) = z;
  return out;
}

// Fitted second moment of `rhs` on the columns of `lhs`, divided by
// `divisor`.
Projection project(const Matrix& lhs, const Matrix& rhs, double divisor, MeatKind kind,
                   const ProjectionOptions& options) {
  if (lhs.rows() != rhs.rows())
    throw Error(ErrorCode::Input, "attribute rows do not match the score rows");
  Projection p;
  p.meat.kind = kind;
  p.meat.divisor = divisor;
  p.underdetermined = lhs.rows() < lhs.cols();
  PivotedSolve solve = pivoted_least_squares(lhs, rhs, options.pivot_tol);
  const int shift = options.prepend_intercept ? 1 : 0;
  for (int j : solve.dropped) p.dropped.push_back(j - shift);
  if (options.strict && !solve.dropped.empty()) {
    std::ostringstream msg;
    msg << "attribute Gram matrix is singular; collinear attribute columns:";
    for (int j : p.dropped) msg << ' ' << (j < 0 ? std::string("(intercept)") : std::to_string(j));
    throw Error(ErrorCode::SingularAttributes, msg.str());
  }
  const Matrix fitted = lhs * solve.coef;
  Matrix m = Matrix::Zero(rhs.cols(), rhs.cols());
  m.selfadjointView<Eigen::Lower>().rankUpdate(fitted.transpose());
  p.meat.value = Matrix(m.selfadjointView<Eigen::Lower>()) / divisor;
  return p;
}

void check_dim(Dimension dim) {
  if (dim == Dimension::Intersection)
    throw Error(ErrorCode::Input, "cluster projections take the G or H dimension");
}

}  // namespace

Projection delta_z(const Matrix& scores, const Matrix& z, const ProjectionOptions& options) {
  return project(with_intercept(z, options), scores, static_cast<double>(scores.rows()),
                 MeatKind::ShrinkZ, options);
}

Projection delta_z_ce(const Matrix& scores, const Matrix& z, const ClusterIndex& clusters,
                      Dimension dim, const ProjectionOptions& options) {
  check_dim(dim);
  const Matrix zs = cluster_sums(with_intercept(z, options), clusters.ids(dim), clusters.count(dim));
  const Matrix ms = cluster_sums(scores, clusters.ids(dim), clusters.count(dim));
  return project(zs, ms, static_cast<double>(scores.rows()), MeatKind::ShrinkZCE, options);
}

Projection delta_z_dim(const Matrix& scores, const Matrix& z, const ClusterIndex& clusters,
                       Dimension dim, double population_size, const ProjectionOptions& options) {
  check_dim(dim);
  if (!(population_size > 0.0)) throw Error(ErrorCode::Input, "population size must be positive");
  const Matrix zs = cluster_sums(with_intercept(z, options), clusters.ids(dim), clusters.count(dim));
  const Matrix ms = cluster_sums(scores, clusters.ids(dim), clusters.count(dim));
  return project(zs, ms, population_size,
                 dim == Dimension::G ? MeatKind::ShrinkZGE : MeatKind::ShrinkZHE, options);
}

double AdjustmentInputs::ratio_n() const {
  return static_cast<double>(scores.rows()) / static_cast<double>(meta.population_size);
}
double AdjustmentInputs::ratio_g() const {
  return static_cast<double>(clusters.n_g) / static_cast<double>(meta.total_g);
}
double AdjustmentInputs::ratio_h() const {
  return static_cast<double>(clusters.n_h) / static_cast<double>(meta.total_h);
}

AdjustmentInputs make_adjustment_inputs(const Matrix& scores, const Matrix& z,
                                        const ClusterIndex& clusters, const PopulationMeta& meta) {
  if (static_cast<std::size_t>(scores.rows()) != clusters.rows())
    throw Error(ErrorCode::Input, "scores and cluster labels differ in length");
  if (z.size() != 0 && z.rows() != scores.rows())
    throw Error(ErrorCode::Input, "attributes and scores differ in length");
  AdjustmentInputs in;
  in.scores = scores;
  in.z = z.size() == 0 ? Matrix(scores.rows(), 0) : z;
  in.clusters = clusters;
  in.meta = meta;
  return in;
}

AdjustmentInputs ape_adjusted_inputs(const Matrix& psi, const AdjustmentInputs& base) {
  if (psi.rows() != base.scores.rows())
    throw Error(ErrorCode::Input, "APE residuals and scores differ in length");
  AdjustmentInputs in = base;
  in.scores = psi;
  return in;
}

namespace {

void require(bool given, const char* what, const char* family) {
  if (!given)
    throw Error(ErrorCode::MetadataRequired,
                std::string(family) + " needs the " + what + " (population metadata)");
}

AdjustedVariance finalize(AdjustedVariance a, const AdjustmentInputs& in, const Matrix& hessian,
                          Family family, double dof) {
  const std::size_t n = static_cast<std::size_t>(in.scores.rows());
  a.report = hessian.size() == 0 ? direct_report(a.meat, n) : sandwich(a.meat, hessian, n);
  a.report.family = family;
  a.report.case_id = a.case_id;
  a.report.dof = dof;
  return a;
}

void note_projection(AdjustedVariance& a, const Projection& p, const AdjustmentInputs& in,
                     const char* label) {
  if (!p.dropped.empty()) {
    std::ostringstream msg;
    msg << label << ": dropped collinear attributes";
    for (int j : p.dropped) {
      msg << ' ';
      if (j < 0)
        msg << "(intercept)";
      else if (static_cast<std::size_t>(j) < in.z_names.size())
        msg << in.z_names[j];
      else
        msg << "z" << j;
    }
    a.report.notes.push_back(msg.str());
  }
  if (p.underdetermined)
    a.report.notes.push_back(std::string(label) +
                             ": more attributes than clusters; projection is exact");
}

}  // namespace

AdjustedVariance adjusted_oneway(const AdjustmentInputs& in, int case_id, Dimension dim,
                                 const Matrix& hessian_avg) {
  if (case_id < 1 || case_id > 4)
    throw Error(ErrorCode::Input, "one-way adjustment case must be 1, 2, 3 or 4");
  check_dim(dim);
  require(in.meta.given_m, "population size M", "adjusted one-way variance");
  if (case_id == 1)
    require(dim == Dimension::G ? in.meta.given_g : in.meta.given_h,
            dim == Dimension::G ? "total number of G clusters" : "total number of H clusters",
            "adjusted one-way variance (case 1)");

  const Matrix& s = in.scores;
  const double nm = in.ratio_n();
  AdjustedVariance a;
  a.case_id = case_id;
  const MeatMatrix ehw = meat_ehw(s);
  a.components["ehw"] = ehw;
  Projection proj;
  if (case_id == 1 || case_id == 4) {
    proj = delta_z(s, in.z, in.projection);
  } else {
    proj = delta_z_ce(s, in.z, in.clusters, dim, in.projection);
  }
  a.components[to_string(proj.meat.kind)] = proj.meat;
  a.meat = ehw.value - nm * proj.meat.value;
  if (case_id != 4) {
    const MeatMatrix cl = meat_cluster(s, in.clusters, dim);
    a.components[to_string(cl.kind)] = cl;
    const double ratio = dim == Dimension::G ? in.ratio_g() : in.ratio_h();
    const double weight = case_id == 1 ? 1.0 - ratio : 1.0;
    a.meat += weight * cl.value;
  }
  const double dof = case_id == 4 ? std::max(1.0, double(s.rows() - s.cols()))
                                  : oneway_dof(in.clusters, dim);
  a = finalize(std::move(a), in, hessian_avg, Family::AdjOneWay, dof);
  a.report.dim = dim;
  note_projection(a, proj, in, to_string(proj.meat.kind));
  if (case_id == 3)
    a.report.notes.push_back(
        "case 3: cluster projection applied under cluster sampling; its lower-bound "
        "guarantee assumes every unit of a sampled cluster is observed");
  return a;
}

AdjustedVariance adjusted_twoway(const AdjustmentInputs& in, int case_id,
                                 const Matrix& hessian_avg) {
  if (case_id != 1 && case_id != 2)
    throw Error(ErrorCode::Input, "two-way adjustment case must be 1 or 2");
  require(in.meta.given_m, "population size M", "adjusted two-way variance");
  const Matrix& s = in.scores;
  const double nm = in.ratio_n();
  AdjustedVariance a;
  a.case_id = case_id;
  const MeatMatrix ehw = meat_ehw(s);
  const MeatMatrix dg = meat_cluster(s, in.clusters, Dimension::G);
  const MeatMatrix dh = meat_cluster(s, in.clusters, Dimension::H);
  a.components["ehw"] = ehw;
  a.components[to_string(dg.kind)] = dg;
  a.components[to_string(dh.kind)] = dh;
  std::vector<std::pair<Projection, const char*>> projections;
  if (case_id == 1) {
    require(in.meta.given_g && in.meta.given_h, "total numbers of G and H clusters",
            "adjusted two-way variance (case 1)");
    const MeatMatrix dgh = meat_cluster(s, in.clusters, Dimension::Intersection);
    a.components[to_string(dgh.kind)] = dgh;
    const double rg = in.ratio_g();
    const double rh = in.ratio_h();
    Projection pz = delta_z(s, in.z, in.projection);
    a.components[to_string(pz.meat.kind)] = pz.meat;
    a.meat = ehw.value + (1.0 - rg) * (dg.value - dgh.value) + (1.0 - rh) * (dh.value - dgh.value) +
             (1.0 - rg * rh) * dgh.value - nm * pz.meat.value;
    projections.emplace_back(std::move(pz), "shrink-z");
  } else {
    const double m = static_cast<double>(in.meta.population_size);
    Projection pg = delta_z_dim(s, in.z, in.clusters, Dimension::G, m, in.projection);
    Projection ph = delta_z_dim(s, in.z, in.clusters, Dimension::H, m, in.projection);
    a.components[to_string(pg.meat.kind)] = pg.meat;
    a.components[to_string(ph.meat.kind)] = ph.meat;
    const double scale = in.rescale_by_sampling ? 1.0 : nm;
    a.meat = 2.0 * ehw.value + dg.value + dh.value - scale * (pg.meat.value + ph.meat.value);
    projections.emplace_back(std::move(pg), "shrink-z-ge");
    projections.emplace_back(std::move(ph), "shrink-z-he");
  }
  a = finalize(std::move(a), in, hessian_avg, Family::AdjTwoWay, twoway_dof(in.clusters));
  for (const auto& [p, label] : projections) note_projection(a, p, in, label);
  return a;
}

AdjustedVariance adjusted_cgm(const AdjustmentInputs& in, const Matrix& hessian_avg) {
  require(in.meta.given_m, "population size M", "adjusted CGM variance");
  const Matrix& s = in.scores;
  const double m = static_cast<double>(in.meta.population_size);
  AdjustedVariance a;
  a.case_id = 2;
  Projection pg = delta_z_dim(s, in.z, in.clusters, Dimension::G, m, in.projection);
  Projection ph = delta_z_dim(s, in.z, in.clusters, Dimension::H, m, in.projection);
  a.components[to_string(pg.meat.kind)] = pg.meat;
  a.components[to_string(ph.meat.kind)] = ph.meat;
  const double scale = in.rescale_by_sampling ? 1.0 : in.ratio_n();
  a.meat = cgm_meat(s, in.clusters) - scale * (pg.meat.value + ph.meat.value);
  a = finalize(std::move(a), in, hessian_avg, Family::AdjCGM, twoway_dof(in.clusters));
  note_projection(a, pg, in, "shrink-z-ge");
  note_projection(a, ph, in, "shrink-z-he");
  return a;
}

}  // namespace fpc
