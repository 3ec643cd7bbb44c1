#pragma once

#include "fpc/linalg.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fpc {

enum class Dimension { G, H, Intersection };

const char* to_string(Dimension dim);

// Two-way cluster membership for each row. Labels are dense (0..n_g-1,
// 0..n_h-1) and `cell` indexes the nonempty (g, h) intersections densely.
struct ClusterIndex {
  std::vector<int> g;
  std::vector<int> h;
  std::vector<int> cell;
  int n_g = 0;
  int n_h = 0;
  int n_cells = 0;
  std::vector<int> size_g;
  std::vector<int> size_h;
  std::vector<int> size_cell;
  bool one_way = false;  // h was not supplied, h := g

  std::size_t rows() const { return g.size(); }
  const std::vector<int>& ids(Dimension dim) const;
  int count(Dimension dim) const;
  const std::vector<int>& sizes(Dimension dim) const;
};

ClusterIndex canonicalize(std::span<const std::string> raw_g,
                          std::span<const std::string> raw_h);
ClusterIndex canonicalize(std::span<const std::int64_t> raw_g,
                          std::span<const std::int64_t> raw_h);

// One-way data: h := g.
ClusterIndex canonicalize(std::span<const std::string> raw_g);

// Builds the index from labels that are already dense; used by the
// population generators where g, h come from a grid.
ClusterIndex from_dense(std::vector<int> g, std::vector<int> h);

struct Cell {
  int g = 0;
  int h = 0;
  std::vector<int> rows;
};

// Nonempty (g, h) intersections ordered by (g, h).
std::vector<Cell> intersection_cells(const ClusterIndex& index);

// Finite-population bookkeeping. Totals the caller omits default to the
// observed counts; the given_* flags record which values were supplied.
struct PopulationMeta {
  std::int64_t population_size = 0;  // M
  int total_g = 0;                   // G
  int total_h = 0;                   // H
  bool given_m = false;
  bool given_g = false;
  bool given_h = false;

  bool defaulted() const { return !(given_m && given_g && given_h); }
};

struct ObservedDataset {
  Vector y;
  Matrix x;  // assignment columns, n x a
  Matrix z;  // fixed attributes, n x p
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
  ClusterIndex clusters;
  PopulationMeta meta;

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
  int sampled_g() const { return clusters.n_g; }
  int sampled_h() const { return clusters.n_h; }

  // Throws Error(Input) when shapes disagree or bookkeeping is impossible.
  void validate() const;
};

// Fills unset totals with the observed counts (full-population default).
PopulationMeta resolve_meta(const ClusterIndex& clusters, std::size_t n,
                            std::int64_t population_size, int total_g,
                            int total_h);

enum class SamplingKind { Population, UnitBernoulli, OneWayCluster, TwoWayCluster };
enum class AssignmentKind { Independent, OneWayClustered, TwoWayClustered, IntersectionClustered };

struct DesignDescriptor {
  SamplingKind sampling = SamplingKind::Population;
  double rho_u = 1.0;
  double rho_g = 1.0;
  double rho_h = 1.0;
  AssignmentKind assignment = AssignmentKind::Independent;
  Dimension assignment_dim = Dimension::G;

  void validate() const;
  bool cluster_sampling() const;
  bool cluster_assignment() const;
  // Row of the one-way adjusted-estimator table implied by the design.
  int oneway_case() const;
};

}  // namespace fpc
