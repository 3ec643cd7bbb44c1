#pragma once

#include "fpc/data_model.hpp"

#include <functional>
#include <vector>

namespace fpc {

// Exhaustive enumeration of binary cluster draws A_g, B_h for tiny
// populations. Every configuration carries its probability, so expectations
// are exact finite sums.
inline constexpr int kEnumerationCap = 16;

struct ProductConfig {
  std::vector<int> a;
  std::vector<int> b;
  double prob = 0.0;
};

// All 2^(G+H) configurations with P(A_g = 1) = p_a, P(B_h = 1) = p_b.
// Throws Error(SizeCap) when G + H exceeds the cap.
std::vector<ProductConfig> enumerate_product(int G, int H, double p_a, double p_b,
                                             int cap = kEnumerationCap);

// E[X_i X_j] for X_i = A_g(i) B_h(i).
Matrix expected_xx(const ClusterIndex& clusters, double p_a, double p_b);

// Cov(R_i, R_j) for two-stage Bernoulli sampling, enumerating cluster and
// unit draws (G + H + n bounded by the cap).
Matrix sampling_covariance(const ClusterIndex& clusters, double rho_g,
                           double rho_h, double rho_u);

// Potential outcomes y_i(0), y_i(1) under binary product assignment.
struct BinaryOutcomes {
  Vector y0;
  Vector y1;
  double ate() const { return (y1 - y0).mean(); }
};

// Sum_i E[Y_i (X_i - Xbar_g(i))] / Sum_i E[X_i (X_i - Xbar_g(i))].
double owfe_estimand_enumerated(const ClusterIndex& clusters,
                                const BinaryOutcomes& po, double p_a, double p_b);
// The same ratio with X-tilde from the two-way transform.
double twfe_estimand_enumerated(const ClusterIndex& clusters,
                                const BinaryOutcomes& po, double p_a, double p_b);

// E_config[f(config)] over all product configurations.
double expect(const std::vector<ProductConfig>& configs,
              const std::function<double(const ProductConfig&)>& f);

// Difference-in-means moments on the full population (N = M): the true
// variance of the linearization and the expectations of the EHW+cluster
// meats built on the scores eta_i.
struct DimMoments {
  double b1 = 0.0;
  double true_variance = 0.0;   // (1/M) sum_i sum_{j in N_i} E[xi_i xi_j]
  double direct_variance = 0.0; // Var(sum_i xi_i) / M
  double cgm = 0.0;             // (1/M) sum_i sum_{j in N_i} E[eta_i eta_j]
  double cgm2 = 0.0;            // G and H sums counted separately
  double lz_g = 0.0;
  double lz_h = 0.0;
  double heterogeneity = 0.0;   // (1/M) sum_i sum_{j in N_i} (tau_i - tau)(tau_j - tau)
};

DimMoments diff_in_means_moments(const ClusterIndex& clusters,
                                 const BinaryOutcomes& po, double p_a, double p_b);

// Bounded-cluster-size layout with treatment-effect deviations of +1 in the
// diagonal cells (k, k), k odd, and -1 in the adjacent cells (k, k+-1),
// (k+-1, k). Cluster indices wrap around. G must be even.
struct CounterexamplePopulation {
  ClusterIndex clusters;
  Vector tau_dev;
};

CounterexamplePopulation counterexample_population(int G, int G0);

// (1/M) sum_i sum_{j in N_i} d_i d_j, N_i = units sharing a G or H cluster.
double neighborhood_cross_sum(const ClusterIndex& clusters, const Vector& d);

}  // namespace fpc
