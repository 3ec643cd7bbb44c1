#pragma once

#include "fpc/variance.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fpc {

struct ProjectionOptions {
  bool prepend_intercept = true;
  // Throw on a rank-deficient attribute Gram instead of dropping columns.
  bool strict = false;
  double pivot_tol = 1e-10;
};

struct Projection {
  MeatMatrix meat;
  std::vector<int> dropped;  // attribute columns (after any intercept) dropped
  bool underdetermined = false;  // more attributes than projection rows
};

// (1/N) F'F where F holds the least-squares fitted values of each score
// column on the attribute matrix.
Projection delta_z(const Matrix& scores, const Matrix& z,
                   const ProjectionOptions& options = {});

// Cluster-level analog: score and attribute rows are summed within the
// clusters of `dim` before projecting; divisor N.
Projection delta_z_ce(const Matrix& scores, const Matrix& z,
                      const ClusterIndex& clusters, Dimension dim,
                      const ProjectionOptions& options = {});

// Per-dimension cluster projection with divisor M (population size).
Projection delta_z_dim(const Matrix& scores, const Matrix& z,
                       const ClusterIndex& clusters, Dimension dim,
                       double population_size,
                       const ProjectionOptions& options = {});

struct AdjustmentInputs {
  Matrix scores;
  Matrix z;
  ClusterIndex clusters;
  PopulationMeta meta;
  std::vector<std::string> z_names;
  ProjectionOptions projection;
  // Under sampling combined with two-way clustered assignment, divide the
  // per-dimension projections by N/M.
  bool rescale_by_sampling = false;

  double ratio_n() const;  // N/M
  double ratio_g() const;  // G_N/G
  double ratio_h() const;  // H_N/H
};

AdjustmentInputs make_adjustment_inputs(const Matrix& scores, const Matrix& z,
                                        const ClusterIndex& clusters,
                                        const PopulationMeta& meta);

// Same inputs built on the APE residuals psi instead of the scores.
AdjustmentInputs ape_adjusted_inputs(const Matrix& psi,
                                     const AdjustmentInputs& base);

struct AdjustedVariance {
  VarianceReport report;
  int case_id = 0;
  std::map<std::string, MeatMatrix> components;
  Matrix meat;
};

// With an empty hessian_avg the meat is reported directly (APE path).
AdjustedVariance adjusted_oneway(const AdjustmentInputs& inputs, int case_id,
                                 Dimension dim, const Matrix& hessian_avg);
AdjustedVariance adjusted_twoway(const AdjustmentInputs& inputs, int case_id,
                                 const Matrix& hessian_avg);
// Inclusion-exclusion meat with the case-2 per-dimension projections
// subtracted.
AdjustedVariance adjusted_cgm(const AdjustmentInputs& inputs,
                              const Matrix& hessian_avg);

}  // namespace fpc
