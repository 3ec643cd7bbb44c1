#pragma once

#include "fpc/dgp.hpp"
#include "fpc/variance.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fpc {

// One column of a study: a standard-error family evaluated for every target.
struct StudyFamily {
  std::string name;
  double dof = 0.0;
};

struct ReplicationResult {
  std::uint64_t rep = 0;
  bool failed = false;
  std::string failure;
  std::vector<double> estimates;  // per target
  std::vector<double> se;         // target-major: se[t * families + f]
  int negative_variance = 0;
};

struct SummaryRow {
  std::string target;
  std::string family;  // "oracle" for the Monte Carlo SD row
  double truth = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
  double sd = 0.0;
  std::size_t reps = 0;
  std::size_t nan_se = 0;
};

struct SummaryTable {
  std::string design;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::size_t rep_count = 0;
  std::size_t failed_reps = 0;
  bool sd_undefined = false;  // fewer than two successful replications
  std::vector<SummaryRow> rows;
  std::vector<std::string> notes;

  const SummaryRow* find(const std::string& target, const std::string& family) const;
};

// Population, truth and per-replication work for one named design.
class Study {
 public:
  Study(StudyDesign design, std::uint64_t seed);

  StudyDesign design() const { return design_; }
  std::uint64_t seed() const { return seed_; }
  const PopulationSpec& population() const { return spec_; }
  const std::vector<std::string>& targets() const { return targets_; }
  const std::vector<StudyFamily>& families() const { return families_; }
  const std::vector<double>& truth() const { return truth_; }

  ReplicationResult replicate(std::uint64_t rep) const;

 private:
  ReplicationResult probit_rep(std::uint64_t rep) const;
  ReplicationResult twovar_rep(std::uint64_t rep) const;
  ReplicationResult tripled_rep(std::uint64_t rep) const;

  StudyDesign design_;
  std::uint64_t seed_;
  PopulationSpec spec_;
  std::vector<std::string> targets_;
  std::vector<StudyFamily> families_;
  std::vector<double> truth_;
};

// Exact estimand for the design's targets (see Study::truth()).
std::vector<double> truth_for(const PopulationSpec& spec);

// Replications [first, first + count) on `workers` threads; results are
// returned in replication order whatever the worker count.
std::vector<ReplicationResult> run_replications(const Study& study,
                                                std::uint64_t first,
                                                std::uint64_t count,
                                                int workers = 1);

// Aggregates in replication order. Throws Error(StudyFailed) when more than
// 1% of replications failed.
SummaryTable summarize(const Study& study,
                       const std::vector<ReplicationResult>& results,
                       double level = 0.95);

SummaryTable run_study(StudyDesign design, std::uint64_t reps,
                       std::uint64_t seed, int workers = 1, double level = 0.95);

// Fraction of |estimate - truth| <= crit * se; NaN se never covers and is
// counted in `nan_count` when supplied.
double coverage(const std::vector<double>& estimates,
                const std::vector<double>& ses, double truth, double crit,
                std::size_t* nan_count = nullptr);

}  // namespace fpc
