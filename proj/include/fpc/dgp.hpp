#pragma once

#include "fpc/data_model.hpp"
#include "fpc/mestimation.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fpc {

// Substream keys: every draw is made from an mt19937_64 seeded with
// splitmix64(seed, rep, tag), so assignment and sampling streams of
// different replications never share state.
enum class StreamTag : std::uint64_t {
  Population = 1,
  Assignment = 2,
  Sampling = 3,
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t rep, StreamTag tag);

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t rep, StreamTag tag);
  explicit Rng(std::uint64_t key);

  bool coin(double p = 0.5);
  double uniform();  // [0, 1) with 53 random bits
  double normal(double mean = 0.0, double sd = 1.0);
  int sign() { return coin() ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

enum class StudyDesign {
  ProbitOneWay,
  ProbitTwoWay,
  TwoVar1,
  TwoVar2,
  TripleDiff1,
  TripleDiff2,
};

const char* to_string(StudyDesign design);
StudyDesign parse_design(const std::string& name);  // throws Error(Input)
std::vector<std::string> design_names();

enum class RuleKind {
  OneWayBernoulli,  // X = A_g
  TwoWayProduct,    // X = A_g B_h
  TwoVariable,      // X_g = A_g, X_h = B_h
  TripleDiff,       // D = D_g D_h Post
};

struct AssignmentRule {
  RuleKind kind = RuleKind::TwoWayProduct;
  double p_a = 0.5;
  double p_b = 0.5;
  bool fixed_a = false;  // A_g drawn once with the population and held fixed
};

struct PopulationSpec {
  StudyDesign design = StudyDesign::ProbitTwoWay;
  int G = 0;
  int H = 0;
  int per_cell = 1;
  std::uint64_t seed = 0;
  ClusterIndex clusters;
  AssignmentRule assignment;
  DesignDescriptor sampling;

  // Probit designs: z_i = z_g + z_h, e orthogonal to (1, z).
  Vector z_g, z_h, z, e;
  // Two-variable design: y = tau1 x_g + tau2 x_h + e.
  Vector tau1, tau2;
  // Triple differences: per-unit tau, fixed effects and period shocks.
  Vector tau, alpha_gh, eps0, eps1;
  Matrix gamma_ht, delta_gt;  // H x 2, G x 2
  std::vector<int> fixed_a;   // design with nonstochastic D_g

  std::size_t size() const { return clusters.rows(); }
};

// Probit population on a G x H grid with `per_cell` units per intersection.
// Two-way mode: z_g, z_h = +-1; one-way mode: z_g = +-2 and B_h fixed at 1.
PopulationSpec build_probit_population(int G, int H, int per_cell, bool two_way,
                                       std::uint64_t seed);
PopulationSpec build_twovar_population(int G, int H, int design,
                                       std::uint64_t seed);
PopulationSpec build_tripled_population(int G, int H, int design,
                                        std::uint64_t seed,
                                        double noise_sd = 0.6);
PopulationSpec build_population(StudyDesign design, std::uint64_t seed);

// Potential outcome of the probit design.
double probit_outcome(const PopulationSpec& spec, std::size_t i, double x);

struct Assignment {
  std::vector<int> a;  // G draws
  std::vector<int> b;  // H draws
};

Assignment draw_assignment(const PopulationSpec& spec, std::uint64_t rep);

// Unit-level treatment for product rules: X_i = a_g(i) b_h(i).
Vector product_treatment(const ClusterIndex& clusters, const Assignment& asg);

// Observed data set implied by an assignment on the full population. For the
// triple-differences designs each row is a unit's first difference
// (post minus pre), x = D and z = tau.
ObservedDataset realize(const PopulationSpec& spec, const Assignment& asg);

// Two-period panel of the triple-differences designs (2 rows per unit).
TripleDiffPanel tripled_panel(const PopulationSpec& spec, const Assignment& asg);

// Cluster-level Bernoulli draws on G and H, then unit draws inside the
// surviving intersections. Fills population bookkeeping. With `resample`
// an empty draw is repeated (up to 1000 times) instead of throwing.
ObservedDataset bernoulli_two_stage_sample(const ObservedDataset& population,
                                           double rho_g, double rho_h,
                                           double rho_u, Rng& rng,
                                           bool resample = false);

}  // namespace fpc
