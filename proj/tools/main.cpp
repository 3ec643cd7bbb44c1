// fpcluster: regression standard errors for clustered designs, and the
// simulation studies that exercise them.
#include "fpc/fpc.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Failure {
  fpc_status status;
};

void check(fpc_status s) {
  if (s != FPC_OK) throw Failure{s};
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

const std::map<std::string, fpc_family>& family_table() {
  static const std::map<std::string, fpc_family> table{
      {"ehw", FPC_FAMILY_EHW},
      {"lz", FPC_FAMILY_LZ_G},
      {"lz-g", FPC_FAMILY_LZ_G},
      {"lz-h", FPC_FAMILY_LZ_H},
      {"cgm", FPC_FAMILY_CGM},
      {"cgm2", FPC_FAMILY_CGM2},
      {"adj-oneway", FPC_FAMILY_ADJ_ONEWAY_G},
      {"adj-oneway-g", FPC_FAMILY_ADJ_ONEWAY_G},
      {"adj-oneway-h", FPC_FAMILY_ADJ_ONEWAY_H},
      {"adj-twoway", FPC_FAMILY_ADJ_TWOWAY},
      {"adj-cgm", FPC_FAMILY_ADJ_CGM},
  };
  return table;
}

const std::map<std::string, fpc_model>& model_table() {
  static const std::map<std::string, fpc_model> table{
      {"ols", FPC_MODEL_OLS},
      {"probit", FPC_MODEL_PROBIT},
      {"diff-in-means", FPC_MODEL_DIFF_IN_MEANS},
      {"owfe", FPC_MODEL_ONE_WAY_FE},
      {"twfe", FPC_MODEL_TWO_WAY_FE},
  };
  return table;
}

struct EstimateArgs {
  std::string data;
  std::string y;
  std::vector<std::string> x, z, attrs;
  std::string cluster_g, cluster_h;
  std::string model = "ols";
  std::vector<std::string> families{"ehw"};
  int oneway_case = 2;
  int twoway_case = 2;
  std::int64_t population_size = 0;
  std::int64_t total_g = 0;
  std::int64_t total_h = 0;
  bool ape = false;
  bool ape_treated = false;
  bool no_intercept = false;
  bool no_attrs_intercept = false;
  bool small_sample = false;
  bool strict_projection = false;
  double level = 0.95;
  std::string out;
  std::string format = "csv";
};

struct SimulateArgs {
  std::string design;
  std::uint64_t reps = 1000;
  std::uint64_t first = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  double level = 0.95;
  std::string out;
  std::string format = "csv";
};

std::string destination(const std::string& out) { return out.empty() ? "-" : out; }

void run_estimate(const EstimateArgs& a) {
  const auto x = c_strings(a.x);
  const auto z = c_strings(a.z);
  const auto attrs = c_strings(a.attrs);
  fpc_columns cols{};
  cols.y = a.y.c_str();
  cols.x = x.data();
  cols.n_x = x.size();
  cols.z = z.data();
  cols.n_z = z.size();
  cols.cluster_g = a.cluster_g.c_str();
  cols.cluster_h = a.cluster_h.empty() ? nullptr : a.cluster_h.c_str();
  cols.attrs = attrs.data();
  cols.n_attrs = attrs.size();

  fpc_dataset* raw = nullptr;
  check(fpc_dataset_read_csv(a.data.c_str(), &cols, &raw));
  std::unique_ptr<fpc_dataset, decltype(&fpc_dataset_free)> data(raw, fpc_dataset_free);
  check(fpc_dataset_set_population(data.get(), a.population_size, a.total_g, a.total_h));

  std::vector<fpc_family> families;
  for (const auto& f : a.families) families.push_back(family_table().at(f));
  fpc_estimate_options o;
  fpc_estimate_options_init(&o);
  o.model = model_table().at(a.model);
  o.intercept = a.no_intercept ? 0 : 1;
  o.families = families.data();
  o.n_families = families.size();
  o.oneway_case = a.oneway_case;
  o.twoway_case = a.twoway_case;
  o.ape = a.ape || a.ape_treated;
  o.ape_treated_only = a.ape_treated;
  o.level = a.level;
  o.small_sample = a.small_sample;
  o.strict_projection = a.strict_projection;
  o.attrs_intercept = a.no_attrs_intercept ? 0 : 1;

  fpc_report* rep = nullptr;
  check(fpc_estimate(data.get(), &o, &rep));
  std::unique_ptr<fpc_report, decltype(&fpc_report_free)> report(rep, fpc_report_free);
  check(fpc_report_write(report.get(), destination(a.out).c_str(), a.format.c_str()));
}

void run_simulate(const SimulateArgs& a) {
  fpc_summary* raw = nullptr;
  check(fpc_simulate_range(a.design.c_str(), a.first, a.reps, a.seed, a.workers, a.level, &raw));
  std::unique_ptr<fpc_summary, decltype(&fpc_summary_free)> summary(raw, fpc_summary_free);
  if (fpc_summary_failed_reps(summary.get()))
    std::cerr << "warning: " << fpc_summary_failed_reps(summary.get())
              << " replications failed and were skipped\n";
  if (fpc_summary_sd_undefined(summary.get()))
    std::cerr << "warning: fewer than two replications; SD is undefined\n";
  check(fpc_summary_write(summary.get(), destination(a.out).c_str(), a.format.c_str()));
}

std::vector<std::string> keys(const auto& table) {
  std::vector<std::string> out;
  for (const auto& [k, v] : table) out.push_back(k);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-based cluster-robust standard errors"};
  app.set_config("--config", "", "TOML/INI file with option values; unknown keys are rejected");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fpc_version()));

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Fit a model and report standard errors");
  est->add_option("--data", ea.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  est->add_option("--y", ea.y, "Outcome column")->required();
  est->add_option("--x", ea.x, "Assignment columns")->delimiter(',');
  est->add_option("--z", ea.z, "Control columns entering the regression")->delimiter(',');
  est->add_option("--attrs", ea.attrs, "Fixed attributes for the adjusted families")->delimiter(',');
  est->add_option("--cluster-g", ea.cluster_g, "G cluster column")->required();
  est->add_option("--cluster-h", ea.cluster_h, "H cluster column (two-way data)");
  est->add_option("--model", ea.model, "Estimator")
      ->check(CLI::IsMember(keys(model_table())))
      ->capture_default_str();
  est->add_option("--family", ea.families, "Variance families")
      ->delimiter(',')
      ->check(CLI::IsMember(keys(family_table())))
      ->capture_default_str();
  est->add_option("--case", ea.oneway_case, "One-way adjustment case")->check(CLI::Range(1, 4))->capture_default_str();
  est->add_option("--twoway-case", ea.twoway_case, "Two-way adjustment case")
      ->check(CLI::Range(1, 2))
      ->capture_default_str();
  est->add_option("--population-size", ea.population_size, "Population size M")->check(CLI::NonNegativeNumber);
  est->add_option("--total-g", ea.total_g, "Number of G clusters in the population")->check(CLI::NonNegativeNumber);
  est->add_option("--total-h", ea.total_h, "Number of H clusters in the population")->check(CLI::NonNegativeNumber);
  est->add_flag("--ape", ea.ape, "Probit: add the average partial effect of the first x column");
  est->add_flag("--ape-treated", ea.ape_treated, "Probit: average partial effect on the treated");
  est->add_flag("--no-intercept", ea.no_intercept, "Do not add a constant to the regression");
  est->add_flag("--no-attrs-intercept", ea.no_attrs_intercept, "Do not add a constant to the attributes");
  est->add_flag("--small-sample", ea.small_sample, "Apply the finite-cluster multiplier");
  est->add_flag("--strict-projection", ea.strict_projection, "Fail on collinear attributes");
  est->add_option("--level", ea.level, "Confidence level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  est->add_option("--out", ea.out, "Output file (default: standard output)");
  est->add_option("--format", ea.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study");
  std::vector<std::string> designs{"probit-oneway", "probit-twoway", "twovar-1",
                                   "twovar-2",      "tripled-1",     "tripled-2"};
  sim->add_option("--design", sa.design, "Study design")->required()->check(CLI::IsMember(designs));
  sim->add_option("--seed", sa.seed, "Master seed")->required();
  sim->add_option("--reps", sa.reps, "Number of replications")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--first", sa.first, "Index of the first replication")->capture_default_str();
  sim->add_option("--workers", sa.workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber)->capture_default_str();
  sim->add_option("--level", sa.level, "Confidence level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sim->add_option("--out", sa.out, "Output file (default: standard output)");
  sim->add_option("--format", sa.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) run_estimate(ea);
    if (sim->parsed()) run_simulate(sa);
  } catch (const Failure& f) {
    std::cerr << "error: " << fpc_status_string(f.status) << ": " << fpc_last_error() << '\n';
    return static_cast<int>(f.status);
  }
  return 0;
}
