#pragma once

#include "fpc/mestimation.hpp"
#include "fpc/shrinkage.hpp"

#include <functional>
#include <optional>

namespace fpc {

struct ApeResult {
  Vector gamma;   // q
  Matrix f;       // n x q, f_i(theta-hat)
  Matrix psi;     // n x q, f_i - gamma - F L^{-1} m_i
  Matrix F_hat;   // q x k
};

// Probability difference Phi(d_i(x=1) theta) - Phi(d_i(x=0) theta) for the
// treatment column `treatment_col` of the probit design. With
// `treated_only` the average runs over the N_1 rows with x = 1 and the
// residual of a treated row is scaled by N / N_1.
ApeResult probit_ape_binary(const FittedModel& model, const ScoreBundle& scores,
                            int treatment_col, bool treated_only = false);

// Caller-supplied f_i(theta) (n x q) and its gradient rows. grad(i) returns
// the q x k Jacobian of f_i.
struct ApeFunction {
  std::function<Matrix(const Vector& theta)> f;
  std::function<Matrix(const Vector& theta, int row)> grad;
};

ApeResult generic_ape(const FittedModel& model, const ScoreBundle& scores,
                      const ApeFunction& fn);

struct ApeVarianceRequest {
  Family family = Family::EHW;
  Dimension dim = Dimension::G;
  int case_id = 0;
  const AdjustmentInputs* shrink = nullptr;  // needed for adjusted families
};

VarianceReport ape_variance(const ApeResult& ape, const ClusterIndex& clusters,
                            const ApeVarianceRequest& request);

}  // namespace fpc
