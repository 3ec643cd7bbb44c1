#include "fpc/montecarlo.hpp"

#include "fpc/ape.hpp"
#include "fpc/error.hpp"
#include "fpc/mestimation.hpp"
#include "fpc/shrinkage.hpp"

#include <Eigen/LU>

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace fpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_probit(StudyDesign d) {
  return d == StudyDesign::ProbitOneWay || d == StudyDesign::ProbitTwoWay;
}
bool is_twovar(StudyDesign d) { return d == StudyDesign::TwoVar1 || d == StudyDesign::TwoVar2; }

std::vector<std::string> family_names(StudyDesign d) {
  switch (d) {
    case StudyDesign::ProbitOneWay: return {"ehw", "lz-g", "lz-g-adj"};
    case StudyDesign::ProbitTwoWay:
      return {"ehw", "lz-g", "lz-g-adj", "lz-h", "lz-h-adj", "cgm", "cgm-adj", "cgm2", "cgm2-adj"};
    case StudyDesign::TwoVar1:
    case StudyDesign::TwoVar2: return {"ehw", "lz-g", "lz-h", "cgm", "cgm2"};
    case StudyDesign::TripleDiff1:
    case StudyDesign::TripleDiff2:
      return {"ehw", "ehw-adj", "lz-g", "lz-g-adj", "lz-h", "lz-h-adj", "cgm2", "cgm2-adj"};
  }
  return {};
}

// Meat of one named family for the score-like rows in `in.scores`.
Matrix family_meat(const std::string& name, const AdjustmentInputs& in) {
  const Matrix& q = in.scores;
  const ClusterIndex& c = in.clusters;
  const Matrix none;
  if (name == "ehw") return meat_ehw(q).value;
  if (name == "lz-g") return lz_meat(q, c, Dimension::G);
  if (name == "lz-h") return lz_meat(q, c, Dimension::H);
  if (name == "cgm") return cgm_meat(q, c);
  if (name == "cgm2") return cgm2_meat(q, c);
  if (name == "ehw-adj") return adjusted_oneway(in, 4, Dimension::G, none).meat;
  if (name == "lz-g-adj") return adjusted_oneway(in, 2, Dimension::G, none).meat;
  if (name == "lz-h-adj") return adjusted_oneway(in, 2, Dimension::H, none).meat;
  if (name == "cgm-adj") return adjusted_cgm(in, none).meat;
  if (name == "cgm2-adj") return adjusted_twoway(in, 2, none).meat;
  throw Error(ErrorCode::Input, "unknown study family '" + name + "'");
}

// Standard error of coordinate j; an empty `bread` reports the meat directly.
double family_se(const Matrix& meat, const Matrix& bread, std::size_t n, Eigen::Index j,
                 int& negatives) {
  const Matrix v = bread.size() == 0 ? meat : Matrix(bread * meat * bread.transpose());
  const double d = v(j, j);
  if (d < 0.0) ++negatives;
  if (!(d >= 0.0)) return kNaN;
  return std::sqrt(d / static_cast<double>(n));
}

void fill_family_ses(ReplicationResult& r, std::size_t target, const std::vector<StudyFamily>& fams,
                     const AdjustmentInputs& in, const Matrix& bread, Eigen::Index j) {
  const auto n = static_cast<std::size_t>(in.scores.rows());
  for (std::size_t f = 0; f < fams.size(); ++f)
    r.se[target * fams.size() + f] =
        family_se(family_meat(fams[f].name, in), bread, n, j, r.negative_variance);
}

Matrix inverse(const Matrix& hessian) {
  Eigen::FullPivLU<Matrix> lu(hessian);
  if (!lu.isInvertible() || !(condition_number(hessian) < 1e14))
    throw Error(ErrorCode::SingularHessian, "Hessian average is singular in this replication");
  return lu.inverse();
}

double mean_of(const Vector& v) { return v.size() ? v.mean() : 0.0; }

}  // namespace

const SummaryRow* SummaryTable::find(const std::string& target, const std::string& family) const {
  for (const auto& r : rows)
    if (r.target == target && r.family == family) return &r;
  return nullptr;
}

std::vector<double> truth_for(const PopulationSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  const double pa = spec.assignment.p_a;
  const double pb = spec.assignment.p_b;
  switch (spec.assignment.kind) {
    case RuleKind::OneWayBernoulli:
    case RuleKind::TwoWayProduct: {
      // Each unit contributes its treated and untreated rows weighted by the
      // marginal treatment probability.
      const double px = pa * pb;
      Matrix d(2 * n, 3);
      Vector y(2 * n), w(2 * n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int x = 0; x < 2; ++x) {
          const Eigen::Index r = 2 * i + x;
          d.row(r) << 1.0, static_cast<double>(x), spec.z(i);
          y(r) = probit_outcome(spec, static_cast<std::size_t>(i), x);
          w(r) = x == 1 ? px : 1.0 - px;
        }
      const Vector theta = fit_probit_weighted(d, y, w);
      Vector f(n);
      for (Eigen::Index i = 0; i < n; ++i)
        f(i) = normal_cdf(theta(0) + theta(1) + theta(2) * spec.z(i)) -
               normal_cdf(theta(0) + theta(2) * spec.z(i));
      return {mean_of(f), theta(1)};
    }
    case RuleKind::TwoVariable: {
      Matrix xtx = Matrix::Zero(3, 3);
      Vector xty = Vector::Zero(3);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double w = (a ? pa : 1.0 - pa) * (b ? pb : 1.0 - pb);
            Vector row(3);
            row << 1.0, static_cast<double>(a), static_cast<double>(b);
            const double y = spec.tau1(i) * a + spec.tau2(i) * b + spec.e(i);
            xtx += w * row * row.transpose();
            xty += w * y * row;
          }
      const Vector theta = xtx.ldlt().solve(xty);
      return {theta(1), theta(2)};
    }
    case RuleKind::TripleDiff: {
      // sum_i w_i tau_i / sum_i w_i with w_i = E[(A_g - Abar) A_g] E[(B_h - Bbar) B_h].
      const double G = spec.G, H = spec.H;
      const double wb = pb * (1.0 - pb) * (1.0 - 1.0 / H);
      std::vector<double> wa(spec.G);
      if (spec.assignment.fixed_a) {
        double abar = 0.0;
        for (int a : spec.fixed_a) abar += a;
        abar /= G;
        for (int g = 0; g < spec.G; ++g) wa[g] = (spec.fixed_a[g] - abar) * spec.fixed_a[g];
      } else {
        for (int g = 0; g < spec.G; ++g) wa[g] = pa * (1.0 - pa) * (1.0 - 1.0 / G);
      }
      double num = 0.0, den = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = wa[spec.clusters.g[i]] * wb;
        num += w * spec.tau(i);
        den += w;
      }
      return {num / den};
    }
  }
  return {};
}

Study::Study(StudyDesign design, std::uint64_t seed)
    : design_(design), seed_(seed), spec_(build_population(design, seed)) {
  if (is_probit(design))
    targets_ = {"ape", "coef"};
  else if (is_twovar(design))
    targets_ = {"tau_g", "tau_h"};
  else
    targets_ = {"tau"};
  for (const auto& name : family_names(design))
    families_.push_back({name, static_cast<double>(spec_.G - 1)});
  truth_ = truth_for(spec_);
}

ReplicationResult Study::replicate(std::uint64_t rep) const {
  try {
    if (is_probit(design_)) return probit_rep(rep);
    if (is_twovar(design_)) return twovar_rep(rep);
    return tripled_rep(rep);
  } catch (const std::exception& e) {
    ReplicationResult r;
    r.rep = rep;
    r.failed = true;
    r.failure = e.what();
    r.estimates.assign(targets_.size(), kNaN);
    r.se.assign(targets_.size() * families_.size(), kNaN);
    return r;
  }
}

ReplicationResult Study::probit_rep(std::uint64_t rep) const {
  const ObservedDataset data = realize(spec_, draw_assignment(spec_, rep));
  RegressorSpec reg;
  reg.x_cols = {0};
  reg.z_cols = {0};
  const FittedModel model = fit_probit(data, reg);
  const ScoreBundle scores = probit_scores(model);
  const ApeResult ape = probit_ape_binary(model, scores, 1);

  ReplicationResult r;
  r.rep = rep;
  r.estimates = {ape.gamma(0), model.theta(1)};
  r.se.assign(targets_.size() * families_.size(), kNaN);
  AdjustmentInputs in = make_adjustment_inputs(scores.scores, data.z, data.clusters, data.meta);
  in.z_names = data.z_names;
  fill_family_ses(r, 0, families_, ape_adjusted_inputs(ape.psi, in), Matrix(), 0);
  fill_family_ses(r, 1, families_, in, inverse(scores.hessian_avg), 1);
  return r;
}

ReplicationResult Study::twovar_rep(std::uint64_t rep) const {
  const ObservedDataset data = realize(spec_, draw_assignment(spec_, rep));
  RegressorSpec reg;
  reg.x_cols = {0, 1};
  const FittedModel model = fit_ols(data, reg);
  const ScoreBundle scores = ols_scores(model);
  ReplicationResult r;
  r.rep = rep;
  r.estimates = {model.theta(1), model.theta(2)};
  r.se.assign(targets_.size() * families_.size(), kNaN);
  const AdjustmentInputs in = make_adjustment_inputs(scores.scores, data.z, data.clusters, data.meta);
  const Matrix bread = inverse(scores.hessian_avg);
  fill_family_ses(r, 0, families_, in, bread, 1);
  fill_family_ses(r, 1, families_, in, bread, 2);
  return r;
}

ReplicationResult Study::tripled_rep(std::uint64_t rep) const {
  const ObservedDataset data = realize(spec_, draw_assignment(spec_, rep));
  const FittedModel model = fit_two_way_fe(data.y, data.x.col(0), data.clusters);
  const ScoreBundle scores = generic_scores(model);
  ReplicationResult r;
  r.rep = rep;
  r.estimates = {model.theta(0)};
  r.se.assign(families_.size(), kNaN);
  AdjustmentInputs in = make_adjustment_inputs(scores.scores, data.z, data.clusters, data.meta);
  in.z_names = data.z_names;
  fill_family_ses(r, 0, families_, in, inverse(scores.hessian_avg), 0);
  return r;
}

std::vector<ReplicationResult> run_replications(const Study& study, std::uint64_t first,
                                                std::uint64_t count, int workers) {
  std::vector<ReplicationResult> out(count);
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(workers),
                                                     std::max<std::uint64_t>(count, 1)));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t k = next++; k < count; k = next++) out[k] = study.replicate(first + k);
  };
  if (workers == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

double coverage(const std::vector<double>& estimates, const std::vector<double>& ses, double truth,
                double crit, std::size_t* nan_count) {
  if (estimates.size() != ses.size())
    throw Error(ErrorCode::Input, "estimates and standard errors differ in length");
  std::size_t covered = 0, nan = 0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (std::isnan(ses[k])) {
      ++nan;
      continue;
    }
    if (std::abs(estimates[k] - truth) <= crit * ses[k]) ++covered;
  }
  if (nan_count) *nan_count = nan;
  return estimates.empty() ? kNaN : static_cast<double>(covered) / static_cast<double>(estimates.size());
}

SummaryTable summarize(const Study& study, const std::vector<ReplicationResult>& results,
                       double level) {
  SummaryTable table;
  table.design = to_string(study.design());
  table.seed = study.seed();
  table.level = level;
  table.rep_count = results.size();
  std::vector<const ReplicationResult*> ok;
  for (const auto& r : results) {
    if (r.failed)
      ++table.failed_reps;
    else
      ok.push_back(&r);
  }
  if (table.failed_reps * 100 > table.rep_count) {
    std::string first;
    for (const auto& r : results)
      if (r.failed) {
        first = "replication " + std::to_string(r.rep) + ": " + r.failure;
        break;
      }
    throw Error(ErrorCode::StudyFailed, std::to_string(table.failed_reps) + " of " +
                                            std::to_string(table.rep_count) +
                                            " replications failed (first: " + first + ")");
  }
  if (table.failed_reps)
    table.notes.push_back(std::to_string(table.failed_reps) + " replications failed and were skipped");
  table.sd_undefined = ok.size() < 2;
  if (table.sd_undefined) table.notes.push_back("fewer than two replications; SD is undefined");

  const auto& fams = study.families();
  const double upper = 1.0 - (1.0 - level) / 2.0;
  int negatives = 0;
  for (const auto* r : ok) negatives += r->negative_variance;
  if (negatives)
    table.notes.push_back(std::to_string(negatives) + " negative variance diagonals reported as NaN");

  for (std::size_t t = 0; t < study.targets().size(); ++t) {
    const double truth = study.truth()[t];
    std::vector<double> est;
    est.reserve(ok.size());
    for (const auto* r : ok) est.push_back(r->estimates[t]);
    double sd = kNaN;
    if (!table.sd_undefined) {
      double mean = 0.0;
      for (double e : est) mean += e;
      mean /= static_cast<double>(est.size());
      double ss = 0.0;
      for (double e : est) ss += (e - mean) * (e - mean);
      sd = std::sqrt(ss / static_cast<double>(est.size() - 1));
    }
    const double oracle_crit = critical_value(fams.empty() ? kInfiniteDof : fams.front().dof, upper);
    SummaryRow oracle;
    oracle.target = study.targets()[t];
    oracle.family = "oracle";
    oracle.truth = truth;
    oracle.mean_se = sd;
    oracle.sd = sd;
    oracle.reps = est.size();
    oracle.coverage = coverage(est, std::vector<double>(est.size(), sd), truth, oracle_crit,
                               &oracle.nan_se);
    table.rows.push_back(oracle);

    for (std::size_t f = 0; f < fams.size(); ++f) {
      std::vector<double> ses;
      ses.reserve(ok.size());
      for (const auto* r : ok) ses.push_back(r->se[t * fams.size() + f]);
      SummaryRow row;
      row.target = study.targets()[t];
      row.family = fams[f].name;
      row.truth = truth;
      row.sd = sd;
      row.reps = est.size();
      row.coverage = coverage(est, ses, truth, critical_value(fams[f].dof, upper), &row.nan_se);
      double sum = 0.0;
      std::size_t finite = 0;
      for (double s : ses)
        if (!std::isnan(s)) {
          sum += s;
          ++finite;
        }
      row.mean_se = finite ? sum / static_cast<double>(finite) : kNaN;
      table.rows.push_back(row);
    }
  }
  return table;
}

SummaryTable run_study(StudyDesign design, std::uint64_t reps, std::uint64_t seed, int workers,
                       double level) {
  if (reps == 0) throw Error(ErrorCode::Input, "number of replications must be positive");
  const Study study(design, seed);
  return summarize(study, run_replications(study, 0, reps, workers), level);
}

}  // namespace fpc
