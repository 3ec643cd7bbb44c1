#include "fpc/dgp.hpp"

#include "fpc/error.hpp"

#include <Eigen/QR>

#include <algorithm>

namespace fpc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t rep, StreamTag tag) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ splitmix64(rep + 0x632BE59BD9B4E019ULL));
  return splitmix64(k ^ static_cast<std::uint64_t>(tag));
}

Rng::Rng(std::uint64_t seed, std::uint64_t rep, StreamTag tag)
    : engine_(stream_key(seed, rep, tag)) {}

Rng::Rng(std::uint64_t key) : engine_(key) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

bool Rng::coin(double p) {
  if (p == 0.5) return (engine_() >> 63) != 0;
  return uniform() < p;
}

double Rng::normal(double mean, double sd) {
  return mean + sd * normal_(engine_);
}

const char* to_string(StudyDesign design) {
  switch (design) {
    case StudyDesign::ProbitOneWay: return "probit-oneway";
    case StudyDesign::ProbitTwoWay: return "probit-twoway";
    case StudyDesign::TwoVar1: return "twovar-1";
    case StudyDesign::TwoVar2: return "twovar-2";
    case StudyDesign::TripleDiff1: return "tripled-1";
    case StudyDesign::TripleDiff2: return "tripled-2";
  }
  return "?";
}

std::vector<std::string> design_names() {
  return {"probit-oneway", "probit-twoway", "twovar-1", "twovar-2", "tripled-1", "tripled-2"};
}

StudyDesign parse_design(const std::string& name) {
  for (auto d : {StudyDesign::ProbitOneWay, StudyDesign::ProbitTwoWay, StudyDesign::TwoVar1,
                 StudyDesign::TwoVar2, StudyDesign::TripleDiff1, StudyDesign::TripleDiff2})
    if (name == to_string(d)) return d;
  std::string known;
  for (const auto& n : design_names()) known += (known.empty() ? "" : ", ") + n;
  throw Error(ErrorCode::Input, "unknown design '" + name + "' (expected one of " + known + ")");
}

namespace {

ClusterIndex grid(int G, int H, int per_cell) {
  if (G < 1 || H < 1 || per_cell < 1) throw Error(ErrorCode::Input, "grid sizes must be positive");
  std::vector<int> g, h;
  g.reserve(static_cast<std::size_t>(G) * H * per_cell);
  h.reserve(g.capacity());
  for (int a = 0; a < G; ++a)
    for (int b = 0; b < H; ++b)
      for (int k = 0; k < per_cell; ++k) {
        g.push_back(a);
        h.push_back(b);
      }
  return from_dense(std::move(g), std::move(h));
}

Vector signs(Rng& rng, int count, double magnitude) {
  Vector v(count);
  for (int j = 0; j < count; ++j) v(j) = magnitude * rng.sign();
  return v;
}

}  // namespace

PopulationSpec build_probit_population(int G, int H, int per_cell, bool two_way,
                                       std::uint64_t seed) {
  PopulationSpec s;
  s.design = two_way ? StudyDesign::ProbitTwoWay : StudyDesign::ProbitOneWay;
  s.G = G;
  s.H = H;
  s.per_cell = per_cell;
  s.seed = seed;
  s.clusters = grid(G, H, per_cell);
  s.assignment.kind = two_way ? RuleKind::TwoWayProduct : RuleKind::OneWayBernoulli;
  s.assignment.p_a = 0.5;
  s.assignment.p_b = two_way ? 0.5 : 1.0;
  s.sampling.assignment = two_way ? AssignmentKind::TwoWayClustered : AssignmentKind::OneWayClustered;

  Rng rng(seed, 0, StreamTag::Population);
  s.z_g = signs(rng, G, two_way ? 1.0 : 2.0);
  s.z_h = signs(rng, H, 1.0);
  const auto n = static_cast<Eigen::Index>(s.clusters.rows());
  s.z.resize(n);
  Vector raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.z(i) = s.z_g(s.clusters.g[i]) + s.z_h(s.clusters.h[i]);
    raw(i) = rng.normal();
  }
  Matrix basis(n, 2);
  basis.col(0).setOnes();
  basis.col(1) = s.z;
  Vector coef = basis.colPivHouseholderQr().solve(raw);
  s.e = raw - basis * coef;
  return s;
}

PopulationSpec build_twovar_population(int G, int H, int design, std::uint64_t seed) {
  if (design != 1 && design != 2) throw Error(ErrorCode::Input, "two-variable design is 1 or 2");
  PopulationSpec s;
  s.design = design == 1 ? StudyDesign::TwoVar1 : StudyDesign::TwoVar2;
  s.G = G;
  s.H = H;
  s.seed = seed;
  s.clusters = grid(G, H, 1);
  s.assignment.kind = RuleKind::TwoVariable;
  s.sampling.assignment = AssignmentKind::TwoWayClustered;

  Rng rng(seed, 0, StreamTag::Population);
  const Vector tau_g = signs(rng, G, 1.0);
  const Vector tau_h = signs(rng, H, 1.0);
  const auto n = static_cast<Eigen::Index>(s.clusters.rows());
  s.tau1.resize(n);
  s.tau2.resize(n);
  s.e.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tg = tau_g(s.clusters.g[i]);
    const double th = tau_h(s.clusters.h[i]);
    s.tau1(i) = design == 1 ? th : tg;
    s.tau2(i) = design == 1 ? tg : th;
    s.e(i) = rng.normal();
  }
  return s;
}

PopulationSpec build_tripled_population(int G, int H, int design, std::uint64_t seed,
                                        double noise_sd) {
  if (design != 1 && design != 2) throw Error(ErrorCode::Input, "triple-differences design is 1 or 2");
  if (G < 2) throw Error(ErrorCode::Input, "triple differences need at least two groups");
  PopulationSpec s;
  s.design = design == 1 ? StudyDesign::TripleDiff1 : StudyDesign::TripleDiff2;
  s.G = G;
  s.H = H;
  s.seed = seed;
  s.clusters = grid(G, H, 1);
  s.assignment.kind = RuleKind::TripleDiff;
  s.assignment.fixed_a = design == 2;
  s.sampling.assignment = design == 1 ? AssignmentKind::TwoWayClustered : AssignmentKind::OneWayClustered;
  s.sampling.assignment_dim = Dimension::H;

  Rng rng(seed, 0, StreamTag::Population);
  const Vector tau_g = signs(rng, G, 2.0);
  const Vector tau_h = signs(rng, H, 0.5);
  if (design == 2) {
    do {
      s.fixed_a.assign(G, 0);
      for (int g = 0; g < G; ++g) s.fixed_a[g] = rng.coin() ? 1 : 0;
    } while (std::count(s.fixed_a.begin(), s.fixed_a.end(), 1) == 0 ||
             std::count(s.fixed_a.begin(), s.fixed_a.end(), 0) == 0);
  }
  const auto n = static_cast<Eigen::Index>(s.clusters.rows());
  Vector raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw(i) = tau_g(s.clusters.g[i]) + tau_h(s.clusters.h[i]);
  double centre = 0.0;
  if (design == 1) {
    centre = raw.mean();
  } else {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (s.fixed_a[s.clusters.g[i]]) {
        sum += raw(i);
        ++count;
      }
    centre = sum / count;
  }
  s.tau = raw.array() - centre;

  s.alpha_gh.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.alpha_gh(i) = rng.normal();
  s.gamma_ht.resize(H, 2);
  for (int h = 0; h < H; ++h)
    for (int t = 0; t < 2; ++t) s.gamma_ht(h, t) = rng.normal();
  s.delta_gt.resize(G, 2);
  for (int g = 0; g < G; ++g)
    for (int t = 0; t < 2; ++t) s.delta_gt(g, t) = rng.normal();
  s.eps0.resize(n);
  s.eps1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.eps0(i) = rng.normal(0.0, noise_sd);
    s.eps1(i) = rng.normal(0.0, noise_sd);
  }
  return s;
}

PopulationSpec build_population(StudyDesign design, std::uint64_t seed) {
  switch (design) {
    case StudyDesign::ProbitOneWay: return build_probit_population(50, 50, 1, false, seed);
    case StudyDesign::ProbitTwoWay: return build_probit_population(50, 50, 1, true, seed);
    case StudyDesign::TwoVar1: return build_twovar_population(100, 100, 1, seed);
    case StudyDesign::TwoVar2: return build_twovar_population(100, 100, 2, seed);
    case StudyDesign::TripleDiff1: return build_tripled_population(100, 100, 1, seed);
    case StudyDesign::TripleDiff2: return build_tripled_population(100, 100, 2, seed);
  }
  throw Error(ErrorCode::Input, "unknown design");
}

double probit_outcome(const PopulationSpec& spec, std::size_t i, double x) {
  const auto j = static_cast<Eigen::Index>(i);
  return x + 2.0 * spec.z(j) * x + spec.e(j) > 0.0 ? 1.0 : 0.0;
}

Assignment draw_assignment(const PopulationSpec& spec, std::uint64_t rep) {
  Rng rng(spec.seed, rep, StreamTag::Assignment);
  Assignment a;
  a.a.resize(spec.G);
  a.b.resize(spec.H);
  for (int g = 0; g < spec.G; ++g) a.a[g] = rng.coin(spec.assignment.p_a) ? 1 : 0;
  for (int h = 0; h < spec.H; ++h) a.b[h] = rng.coin(spec.assignment.p_b) ? 1 : 0;
  if (spec.assignment.fixed_a) a.a = spec.fixed_a;
  return a;
}

Vector product_treatment(const ClusterIndex& clusters, const Assignment& asg) {
  Vector x(static_cast<Eigen::Index>(clusters.rows()));
  for (std::size_t i = 0; i < clusters.rows(); ++i)
    x(static_cast<Eigen::Index>(i)) = asg.a[clusters.g[i]] * asg.b[clusters.h[i]];
  return x;
}

namespace {

void full_population_meta(ObservedDataset& d) {
  d.meta.population_size = static_cast<std::int64_t>(d.clusters.rows());
  d.meta.total_g = d.clusters.n_g;
  d.meta.total_h = d.clusters.n_h;
  d.meta.given_m = d.meta.given_g = d.meta.given_h = true;
}

}  // namespace

ObservedDataset realize(const PopulationSpec& spec, const Assignment& asg) {
  ObservedDataset d;
  d.clusters = spec.clusters;
  full_population_meta(d);
  const auto n = static_cast<Eigen::Index>(spec.size());
  switch (spec.assignment.kind) {
    case RuleKind::OneWayBernoulli:
    case RuleKind::TwoWayProduct: {
      const Vector x = product_treatment(spec.clusters, asg);
      d.y.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) d.y(i) = probit_outcome(spec, i, x(i));
      d.x = x;
      d.x_names = {"x"};
      d.z = spec.z;
      d.z_names = {"z"};
      break;
    }
    case RuleKind::TwoVariable: {
      d.x.resize(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        d.x(i, 0) = asg.a[spec.clusters.g[i]];
        d.x(i, 1) = asg.b[spec.clusters.h[i]];
      }
      d.y = spec.tau1.cwiseProduct(d.x.col(0)) + spec.tau2.cwiseProduct(d.x.col(1)) + spec.e;
      d.x_names = {"x_g", "x_h"};
      d.z = Matrix(n, 0);
      break;
    }
    case RuleKind::TripleDiff: {
      const Vector dpost = product_treatment(spec.clusters, asg);
      d.y.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const int g = spec.clusters.g[i];
        const int h = spec.clusters.h[i];
        d.y(i) = spec.tau(i) * dpost(i) + (spec.gamma_ht(h, 1) - spec.gamma_ht(h, 0)) +
                 (spec.delta_gt(g, 1) - spec.delta_gt(g, 0)) + (spec.eps1(i) - spec.eps0(i));
      }
      d.x = dpost;
      d.x_names = {"D"};
      d.z = spec.tau;
      d.z_names = {"tau"};
      break;
    }
  }
  return d;
}

TripleDiffPanel tripled_panel(const PopulationSpec& spec, const Assignment& asg) {
  if (spec.assignment.kind != RuleKind::TripleDiff)
    throw Error(ErrorCode::Input, "panel layout exists only for triple-differences designs");
  const auto n = static_cast<Eigen::Index>(spec.size());
  TripleDiffPanel p;
  p.y.resize(2 * n);
  p.d.resize(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int g = spec.clusters.g[i];
    const int h = spec.clusters.h[i];
    const double treated = asg.a[g] * asg.b[h];
    for (int t = 0; t < 2; ++t) {
      const Eigen::Index r = 2 * i + t;
      const double dt = t == 1 ? treated : 0.0;
      p.d(r) = dt;
      p.y(r) = spec.tau(i) * dt + spec.alpha_gh(i) + spec.gamma_ht(h, t) + spec.delta_gt(g, t) +
               (t == 1 ? spec.eps1(i) : spec.eps0(i));
      p.g.push_back(g);
      p.h.push_back(h);
      p.period.push_back(t);
      p.unit.push_back(static_cast<int>(i));
    }
  }
  return p;
}

ObservedDataset bernoulli_two_stage_sample(const ObservedDataset& population, double rho_g,
                                           double rho_h, double rho_u, Rng& rng, bool resample) {
  for (double p : {rho_g, rho_h, rho_u})
    if (!(p > 0.0 && p <= 1.0))
      throw Error(ErrorCode::Input, "sampling probabilities must lie in (0, 1]");
  const ClusterIndex& c = population.clusters;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> keep_g(c.n_g), keep_h(c.n_h);
    for (int g = 0; g < c.n_g; ++g) keep_g[g] = rng.coin(rho_g);
    for (int h = 0; h < c.n_h; ++h) keep_h[h] = c.one_way ? keep_g[h] : rng.coin(rho_h);
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      const bool unit = rng.coin(rho_u);
      if (keep_g[c.g[i]] && keep_h[c.h[i]] && unit) rows.push_back(static_cast<Eigen::Index>(i));
    }
    if (rows.empty()) {
      if (resample) continue;
      throw Error(ErrorCode::EmptySample, "two-stage Bernoulli draw selected no units");
    }
    ObservedDataset out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.y.resize(n);
    out.x.resize(n, population.x.cols());
    out.z.resize(n, population.z.cols());
    std::vector<std::int64_t> g(rows.size()), h(rows.size());
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index i = rows[r];
      out.y(r) = population.y(i);
      if (population.x.cols()) out.x.row(r) = population.x.row(i);
      if (population.z.cols()) out.z.row(r) = population.z.row(i);
      g[r] = c.g[i];
      h[r] = c.h[i];
    }
    out.x_names = population.x_names;
    out.z_names = population.z_names;
    out.clusters = canonicalize(std::span<const std::int64_t>(g), std::span<const std::int64_t>(h));
    out.clusters.one_way = c.one_way;
    out.meta.population_size = static_cast<std::int64_t>(c.rows());
    out.meta.total_g = c.n_g;
    out.meta.total_h = c.n_h;
    out.meta.given_m = out.meta.given_g = out.meta.given_h = true;
    return out;
  }
  throw Error(ErrorCode::EmptySample, "two-stage Bernoulli draws kept selecting no units");
}

}  // namespace fpc
