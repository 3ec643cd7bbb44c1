#pragma once

#include "fpc/data_model.hpp"

#include <limits>
#include <string>
#include <vector>

namespace fpc {

enum class MeatKind {
  EHW,
  ClusterG,
  ClusterH,
  Intersection,
  ShrinkZ,
  ShrinkZCE,
  ShrinkZGE,
  ShrinkZHE,
  Combined,
};

const char* to_string(MeatKind kind);

struct MeatMatrix {
  Matrix value;
  MeatKind kind = MeatKind::EHW;
  double divisor = 1.0;
};

enum class Family {
  EHW,
  LZ_OneWay,
  CGM,
  CGM2,
  AdjOneWay,
  AdjTwoWay,
  AdjCGM,
};

const char* to_string(Family family);

inline constexpr double kInfiniteDof = std::numeric_limits<double>::infinity();

// V is the variance of sqrt(N)(theta-hat - theta*); se = sqrt(diag(V)/N).
struct VarianceReport {
  Matrix V;
  Vector se;
  Family family = Family::EHW;
  Dimension dim = Dimension::G;  // one-way families only
  int case_id = 0;               // adjusted families only
  double dof = kInfiniteDof;
  std::size_t n = 0;
  bool negative_variance = false;
  std::vector<std::string> notes;
};

MeatMatrix meat_ehw(const Matrix& scores);

// Within-cluster cross products over i != j pairs, divided by N.
MeatMatrix meat_cluster(const Matrix& scores, const ClusterIndex& clusters,
                        Dimension dim);

// Rows are cluster ids 0..n_clusters-1; each holds the sum of member rows.
Matrix cluster_sums(const Matrix& rows, const std::vector<int>& ids,
                    int n_clusters);

// Outer-product sum over clusters divided by N: meat_ehw + meat_cluster.
Matrix cluster_outer(const Matrix& scores, const ClusterIndex& clusters,
                     Dimension dim);

// L^{-1} meat L^{-1} with se from diag(V)/n. Negative diagonal entries give
// se = NaN and set negative_variance.
VarianceReport sandwich(const Matrix& meat, const Matrix& hessian_avg,
                        std::size_t n);

// Variance report from a meat already expressed in the target scale (APE
// residuals carry the Hessian inverse themselves).
VarianceReport direct_report(const Matrix& meat, std::size_t n);

struct VarianceOptions {
  // Stata-style c = G/(G-1) * (N-1)/(N-k) multiplier; off by default.
  bool small_sample = false;
};

VarianceReport v_ehw(const Matrix& scores, const Matrix& hessian_avg,
                     const VarianceOptions& options = {});
VarianceReport v_lz_oneway(const Matrix& scores, const Matrix& hessian_avg,
                           const ClusterIndex& clusters, Dimension dim,
                           const VarianceOptions& options = {});
VarianceReport v_cgm(const Matrix& scores, const Matrix& hessian_avg,
                     const ClusterIndex& clusters,
                     const VarianceOptions& options = {});
VarianceReport v_cgm2(const Matrix& scores, const Matrix& hessian_avg,
                      const ClusterIndex& clusters,
                      const VarianceOptions& options = {});

// Meats on their own, shared with the APE and shrinkage code.
Matrix lz_meat(const Matrix& scores, const ClusterIndex& clusters, Dimension dim);
Matrix cgm_meat(const Matrix& scores, const ClusterIndex& clusters);
Matrix cgm2_meat(const Matrix& scores, const ClusterIndex& clusters);

double oneway_dof(const ClusterIndex& clusters, Dimension dim);
double twoway_dof(const ClusterIndex& clusters);

// Two-sided t quantile: inverse CDF at `level` (e.g. 0.975). Infinite dof
// gives the normal quantile.
double critical_value(double dof, double level);

}  // namespace fpc
