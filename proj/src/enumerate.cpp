#include "fpc/enumerate.hpp"

#include "fpc/dgp.hpp"
#include "fpc/error.hpp"
#include "fpc/mestimation.hpp"
#include "fpc/variance.hpp"

namespace fpc {

std::vector<ProductConfig> enumerate_product(int G, int H, double p_a, double p_b, int cap) {
  if (G < 1 || H < 1) throw Error(ErrorCode::Input, "enumeration needs at least one cluster per dimension");
  if (G + H > cap)
    throw Error(ErrorCode::SizeCap, "enumeration over " + std::to_string(G + H) +
                                        " cluster draws exceeds the cap of " + std::to_string(cap));
  const std::uint32_t total = 1u << (G + H);
  std::vector<ProductConfig> out;
  out.reserve(total);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    ProductConfig c;
    c.a.resize(G);
    c.b.resize(H);
    c.prob = 1.0;
    for (int g = 0; g < G; ++g) {
      c.a[g] = (mask >> g) & 1u;
      c.prob *= c.a[g] ? p_a : 1.0 - p_a;
    }
    for (int h = 0; h < H; ++h) {
      c.b[h] = (mask >> (G + h)) & 1u;
      c.prob *= c.b[h] ? p_b : 1.0 - p_b;
    }
    out.push_back(std::move(c));
  }
  return out;
}

double expect(const std::vector<ProductConfig>& configs,
              const std::function<double(const ProductConfig&)>& f) {
  double sum = 0.0;
  for (const auto& c : configs) sum += c.prob * f(c);
  return sum;
}

Matrix expected_xx(const ClusterIndex& clusters, double p_a, double p_b) {
  const auto n = static_cast<Eigen::Index>(clusters.rows());
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool sg = clusters.g[i] == clusters.g[j];
      const bool sh = clusters.h[i] == clusters.h[j];
      out(i, j) = (sg ? p_a : p_a * p_a) * (sh ? p_b : p_b * p_b);
    }
  return out;
}

Matrix sampling_covariance(const ClusterIndex& clusters, double rho_g, double rho_h, double rho_u) {
  const int G = clusters.n_g;
  const int H = clusters.n_h;
  const int n = static_cast<int>(clusters.rows());
  if (G + H + n > kEnumerationCap)
    throw Error(ErrorCode::SizeCap, "sampling enumeration over " + std::to_string(G + H + n) +
                                        " draws exceeds the cap of " + std::to_string(kEnumerationCap));
  const std::uint32_t total = 1u << (G + H + n);
  Matrix second = Matrix::Zero(n, n);
  Vector first = Vector::Zero(n);
  std::vector<double> r(n);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    double prob = 1.0;
    auto bit = [&](int k, double p) {
      const bool on = (mask >> k) & 1u;
      prob *= on ? p : 1.0 - p;
      return on;
    };
    std::vector<int> sg(G), sh(H);
    for (int g = 0; g < G; ++g) sg[g] = bit(g, rho_g);
    for (int h = 0; h < H; ++h) sh[h] = bit(G + h, rho_h);
    for (int i = 0; i < n; ++i) {
      const bool u = bit(G + H + i, rho_u);
      r[i] = (sg[clusters.g[i]] && sh[clusters.h[i]] && u) ? 1.0 : 0.0;
    }
    for (int i = 0; i < n; ++i) {
      first(i) += prob * r[i];
      for (int j = 0; j < n; ++j) second(i, j) += prob * r[i] * r[j];
    }
  }
  return second - first * first.transpose();
}

namespace {

void check_outcomes(const ClusterIndex& clusters, const BinaryOutcomes& po) {
  const auto n = static_cast<Eigen::Index>(clusters.rows());
  if (po.y0.size() != n || po.y1.size() != n)
    throw Error(ErrorCode::Input, "potential outcomes do not match the population size");
}

template <typename Transform>
double fe_ratio(const ClusterIndex& clusters, const BinaryOutcomes& po, double p_a, double p_b,
                Transform transform) {
  check_outcomes(clusters, po);
  const auto configs = enumerate_product(clusters.n_g, clusters.n_h, p_a, p_b);
  double num = 0.0, den = 0.0;
  for (const auto& c : configs) {
    Assignment asg{c.a, c.b};
    const Vector x = product_treatment(clusters, asg);
    const Vector xt = transform(x);
    const Vector y = po.y0 + x.cwiseProduct(po.y1 - po.y0);
    num += c.prob * xt.dot(y);
    den += c.prob * xt.dot(x);
  }
  if (den == 0.0) throw Error(ErrorCode::DegenerateDesign, "treatment has no residual variation");
  return num / den;
}

Vector demean_by(const Vector& x, const std::vector<int>& ids, int count) {
  Vector sum = Vector::Zero(count), size = Vector::Zero(count);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum(ids[i]) += x(i);
    size(ids[i]) += 1.0;
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = x(i) - sum(ids[i]) / size(ids[i]);
  return out;
}

double squared_sums(const Vector& v, const ClusterIndex& c, Dimension dim) {
  return cluster_sums(v, c.ids(dim), c.count(dim)).squaredNorm();
}

}  // namespace

double owfe_estimand_enumerated(const ClusterIndex& clusters, const BinaryOutcomes& po, double p_a,
                                double p_b) {
  return fe_ratio(clusters, po, p_a, p_b,
                  [&](const Vector& x) { return demean_by(x, clusters.g, clusters.n_g); });
}

double twfe_estimand_enumerated(const ClusterIndex& clusters, const BinaryOutcomes& po, double p_a,
                                double p_b) {
  return fe_ratio(clusters, po, p_a, p_b,
                  [&](const Vector& x) { return twfe_residualize(x, clusters).value; });
}

double neighborhood_cross_sum(const ClusterIndex& clusters, const Vector& d) {
  if (d.size() != static_cast<Eigen::Index>(clusters.rows()))
    throw Error(ErrorCode::Input, "vector length does not match the population");
  const double total = squared_sums(d, clusters, Dimension::G) +
                       squared_sums(d, clusters, Dimension::H) -
                       squared_sums(d, clusters, Dimension::Intersection);
  return total / static_cast<double>(d.size());
}

DimMoments diff_in_means_moments(const ClusterIndex& clusters, const BinaryOutcomes& po, double p_a,
                                 double p_b) {
  check_outcomes(clusters, po);
  const auto n = static_cast<Eigen::Index>(clusters.rows());
  const double m = static_cast<double>(n);
  DimMoments out;
  out.b1 = p_a * p_b;
  if (!(out.b1 > 0.0 && out.b1 < 1.0))
    throw Error(ErrorCode::DegenerateDesign, "treatment probability must lie strictly inside (0, 1)");
  const double mu1 = po.y1.mean();
  const double mu0 = po.y0.mean();
  const Vector mean_eta = (po.y1.array() - mu1) - (po.y0.array() - mu0);
  const auto configs = enumerate_product(clusters.n_g, clusters.n_h, p_a, p_b);
  for (const auto& c : configs) {
    const Vector x = product_treatment(clusters, Assignment{c.a, c.b});
    Vector eta(n);
    for (Eigen::Index i = 0; i < n; ++i)
      eta(i) = x(i) * (po.y1(i) - mu1) / out.b1 - (1.0 - x(i)) * (po.y0(i) - mu0) / (1.0 - out.b1);
    const Vector xi = eta - mean_eta;
    const double eg = squared_sums(eta, clusters, Dimension::G);
    const double eh = squared_sums(eta, clusters, Dimension::H);
    const double ec = squared_sums(eta, clusters, Dimension::Intersection);
    out.true_variance += c.prob * neighborhood_cross_sum(clusters, xi);
    out.direct_variance += c.prob * xi.sum() * xi.sum() / m;
    out.cgm += c.prob * (eg + eh - ec) / m;
    out.cgm2 += c.prob * (eg + eh) / m;
    out.lz_g += c.prob * eg / m;
    out.lz_h += c.prob * eh / m;
  }
  out.heterogeneity = neighborhood_cross_sum(clusters, mean_eta);
  return out;
}

CounterexamplePopulation counterexample_population(int G, int G0) {
  if (G < 4 || G % 2 != 0)
    throw Error(ErrorCode::Input, "counterexample needs an even number of clusters, at least 4");
  if (G0 < 1) throw Error(ErrorCode::Input, "cell multiplier must be positive");
  std::vector<int> g, h;
  std::vector<double> dev;
  auto add = [&](int a, int b, int count, double d) {
    for (int k = 0; k < count; ++k) {
      g.push_back(((a % G) + G) % G);
      h.push_back(((b % G) + G) % G);
      dev.push_back(d);
    }
  };
  for (int k = 0; k < G; k += 2) {
    add(k, k, 4 * G0, 1.0);
    add(k, k + 1, G0, -1.0);
    add(k, k - 1, G0, -1.0);
    add(k + 1, k, G0, -1.0);
    add(k - 1, k, G0, -1.0);
  }
  CounterexamplePopulation out;
  out.clusters = from_dense(std::move(g), std::move(h));
  out.tau_dev = Eigen::Map<const Vector>(dev.data(), static_cast<Eigen::Index>(dev.size()));
  return out;
}

}  // namespace fpc
