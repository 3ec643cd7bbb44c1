#include "fpc/data_model.hpp"

#include "fpc/error.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace fpc {

const char* to_string(Dimension dim) {
  switch (dim) {
    case Dimension::G: return "G";
    case Dimension::H: return "H";
    case Dimension::Intersection: return "GxH";
  }
  return "?";
}

const std::vector<int>& ClusterIndex::ids(Dimension dim) const {
  switch (dim) {
    case Dimension::G: return g;
    case Dimension::H: return h;
    case Dimension::Intersection: return cell;
  }
  return g;
}

int ClusterIndex::count(Dimension dim) const {
  switch (dim) {
    case Dimension::G: return n_g;
    case Dimension::H: return n_h;
    case Dimension::Intersection: return n_cells;
  }
  return n_g;
}

const std::vector<int>& ClusterIndex::sizes(Dimension dim) const {
  switch (dim) {
    case Dimension::G: return size_g;
    case Dimension::H: return size_h;
    case Dimension::Intersection: return size_cell;
  }
  return size_g;
}

namespace {

template <typename Label>
std::vector<int> dense_labels(std::span<const Label> raw, int& count) {
  std::unordered_map<Label, int> seen;
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = seen.emplace(raw[i], static_cast<int>(seen.size()));
    out[i] = it->second;
  }
  count = static_cast<int>(seen.size());
  return out;
}

std::vector<int> tally(const std::vector<int>& ids, int count) {
  std::vector<int> sizes(count, 0);
  for (int id : ids) ++sizes[id];
  return sizes;
}

void finish(ClusterIndex& index) {
  index.size_g = tally(index.g, index.n_g);
  index.size_h = tally(index.h, index.n_h);
  std::map<std::pair<int, int>, int> cells;
  for (std::size_t i = 0; i < index.g.size(); ++i)
    cells.emplace(std::make_pair(index.g[i], index.h[i]), 0);
  int next = 0;
  for (auto& [key, id] : cells) id = next++;
  index.n_cells = next;
  index.cell.resize(index.g.size());
  for (std::size_t i = 0; i < index.g.size(); ++i)
    index.cell[i] = cells.at({index.g[i], index.h[i]});
  index.size_cell = tally(index.cell, index.n_cells);
}

template <typename Label>
ClusterIndex canonicalize_impl(std::span<const Label> raw_g,
                               std::span<const Label> raw_h) {
  if (raw_g.size() != raw_h.size())
    throw Error(ErrorCode::Input, "cluster label vectors differ in length (" +
                                      std::to_string(raw_g.size()) + " vs " +
                                      std::to_string(raw_h.size()) + ")");
  ClusterIndex index;
  index.g = dense_labels(raw_g, index.n_g);
  index.h = dense_labels(raw_h, index.n_h);
  finish(index);
  return index;
}

}  // namespace

ClusterIndex canonicalize(std::span<const std::string> raw_g,
                          std::span<const std::string> raw_h) {
  return canonicalize_impl(raw_g, raw_h);
}

ClusterIndex canonicalize(std::span<const std::int64_t> raw_g,
                          std::span<const std::int64_t> raw_h) {
  return canonicalize_impl(raw_g, raw_h);
}

ClusterIndex canonicalize(std::span<const std::string> raw_g) {
  ClusterIndex index = canonicalize_impl(raw_g, raw_g);
  index.one_way = true;
  return index;
}

ClusterIndex from_dense(std::vector<int> g, std::vector<int> h) {
  if (g.size() != h.size())
    throw Error(ErrorCode::Input, "cluster label vectors differ in length");
  ClusterIndex index;
  index.n_g = g.empty() ? 0 : *std::max_element(g.begin(), g.end()) + 1;
  index.n_h = h.empty() ? 0 : *std::max_element(h.begin(), h.end()) + 1;
  index.g = std::move(g);
  index.h = std::move(h);
  finish(index);
  for (int s : index.size_g)
    if (s == 0) throw Error(ErrorCode::Input, "dense G labels skip a value");
  for (int s : index.size_h)
    if (s == 0) throw Error(ErrorCode::Input, "dense H labels skip a value");
  return index;
}

std::vector<Cell> intersection_cells(const ClusterIndex& index) {
  std::vector<Cell> cells(index.n_cells);
  for (std::size_t i = 0; i < index.rows(); ++i) {
    Cell& c = cells[index.cell[i]];
    c.g = index.g[i];
    c.h = index.h[i];
    c.rows.push_back(static_cast<int>(i));
  }
  return cells;
}

PopulationMeta resolve_meta(const ClusterIndex& clusters, std::size_t n,
                            std::int64_t population_size, int total_g,
                            int total_h) {
  PopulationMeta meta;
  meta.given_m = population_size > 0;
  meta.given_g = total_g > 0;
  meta.given_h = total_h > 0 || (clusters.one_way && total_g > 0);
  meta.population_size = population_size > 0 ? population_size
                                             : static_cast<std::int64_t>(n);
  meta.total_g = total_g > 0 ? total_g : clusters.n_g;
  meta.total_h = total_h > 0 ? total_h : clusters.n_h;
  if (clusters.one_way && total_h <= 0) meta.total_h = meta.total_g;
  return meta;
}

void ObservedDataset::validate() const {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (n == 0) throw Error(ErrorCode::EmptySample, "data set has no rows");
  if (x.rows() != n && x.size() != 0)
    throw Error(ErrorCode::Input, "assignment matrix has " + std::to_string(x.rows()) +
                                      " rows, outcome has " + std::to_string(n));
  if (z.rows() != n && z.size() != 0)
    throw Error(ErrorCode::Input, "attribute matrix has " + std::to_string(z.rows()) +
                                      " rows, outcome has " + std::to_string(n));
  if (static_cast<Eigen::Index>(clusters.rows()) != n)
    throw Error(ErrorCode::Input, "cluster labels do not match the number of rows");
  if (!x_names.empty() && static_cast<Eigen::Index>(x_names.size()) != x.cols())
    throw Error(ErrorCode::Input, "assignment column names do not match");
  if (!z_names.empty() && static_cast<Eigen::Index>(z_names.size()) != z.cols())
    throw Error(ErrorCode::Input, "attribute column names do not match");
  if (meta.population_size < n)
    throw Error(ErrorCode::Input, "population size " + std::to_string(meta.population_size) +
                                      " is smaller than the sample size " + std::to_string(n));
  if (meta.total_g < clusters.n_g)
    throw Error(ErrorCode::Input, "total G clusters " + std::to_string(meta.total_g) +
                                      " below the sampled count " + std::to_string(clusters.n_g));
  if (meta.total_h < clusters.n_h)
    throw Error(ErrorCode::Input, "total H clusters " + std::to_string(meta.total_h) +
                                      " below the sampled count " + std::to_string(clusters.n_h));
  if (!y.allFinite() || (x.size() && !x.allFinite()) || (z.size() && !z.allFinite()))
    throw Error(ErrorCode::Input, "non-finite values in the data");
}

void DesignDescriptor::validate() const {
  for (double p : {rho_u, rho_g, rho_h})
    if (!(p > 0.0 && p <= 1.0))
      throw Error(ErrorCode::Input, "sampling probabilities must lie in (0, 1]");
  const bool all_one = rho_u == 1.0 && rho_g == 1.0 && rho_h == 1.0;
  if ((sampling == SamplingKind::Population) != all_one)
    throw Error(ErrorCode::Input,
                "population design requires every sampling probability to be 1");
}

bool DesignDescriptor::cluster_sampling() const {
  return sampling == SamplingKind::OneWayCluster || sampling == SamplingKind::TwoWayCluster;
}

bool DesignDescriptor::cluster_assignment() const {
  return assignment != AssignmentKind::Independent;
}

int DesignDescriptor::oneway_case() const {
  const bool cs = cluster_sampling();
  const bool ca = cluster_assignment();
  if (cs && !ca) return 1;
  if (!cs && ca) return 2;
  if (cs && ca) return 3;
  return 4;
}

}  // namespace fpc
