#include "doctest.h"
#include "support.hpp"

#include "fpc/error.hpp"
#include "fpc/montecarlo.hpp"
#include "fpc/report.hpp"

#include <cmath>
#include <limits>

using namespace fpc;

TEST_CASE("coverage counts NaN standard errors as misses") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::size_t missing = 0;
  const double c = coverage({0.1, 0.5, -0.2, 3.0}, {0.1, 1.0, nan, 1.0}, 0.0, 2.0, &missing);
  CHECK(c == doctest::Approx(0.5));
  CHECK(missing == 1);
}

TEST_CASE("study layout") {
  const Study s(StudyDesign::ProbitTwoWay, 1);
  CHECK(s.targets() == std::vector<std::string>{"ape", "coef"});
  CHECK(s.families().size() == 9);
  for (const auto& f : s.families()) CHECK(f.dof == 49.0);
  CHECK(s.truth().size() == 2);
  CHECK(s.truth()[0] > 0.0);
  const Study t(StudyDesign::TripleDiff2, 1);
  CHECK(t.targets() == std::vector<std::string>{"tau"});
  // fixed D_g: truth is the tau average over treated groups, which is centered
  CHECK(std::abs(t.truth()[0]) < 1e-12);
}

TEST_CASE("two-variable truth recovers the average effects") {
  const PopulationSpec s = build_twovar_population(6, 6, 1, 3);
  const std::vector<double> t = truth_for(s);
  CHECK(t[0] == doctest::Approx(s.tau1.mean()).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(s.tau2.mean()).epsilon(1e-12));
}

TEST_CASE("replications are independent of the worker count") {
  const Study s(StudyDesign::TripleDiff1, 3);
  const auto serial = run_replications(s, 0, 24, 1);
  const auto parallel = run_replications(s, 0, 24, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    CHECK(serial[r].rep == r);
    CHECK(serial[r].estimates == parallel[r].estimates);
    CHECK(serial[r].se == parallel[r].se);
  }
  CHECK(summary_table(summarize(s, serial), OutputFormat::Csv) ==
        summary_table(summarize(s, parallel), OutputFormat::Csv));
}

TEST_CASE("same seed gives byte-identical summaries") {
  const std::string a = summary_table(run_study(StudyDesign::ProbitOneWay, 12, 5, 2), OutputFormat::Json);
  const std::string b = summary_table(run_study(StudyDesign::ProbitOneWay, 12, 5, 3), OutputFormat::Json);
  const std::string c = summary_table(run_study(StudyDesign::ProbitOneWay, 12, 6, 2), OutputFormat::Json);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("a run split into ranges equals the full run") {
  const Study s(StudyDesign::TwoVar2, 2);
  auto first = run_replications(s, 0, 10, 2);
  const auto second = run_replications(s, 10, 15, 2);
  first.insert(first.end(), second.begin(), second.end());
  const auto whole = run_replications(s, 0, 25, 1);
  CHECK(summary_table(summarize(s, first), OutputFormat::Csv) ==
        summary_table(summarize(s, whole), OutputFormat::Csv));
}

TEST_CASE("a single replication leaves the SD undefined") {
  const SummaryTable t = run_study(StudyDesign::TwoVar1, 1, 1);
  CHECK(t.sd_undefined);
  const SummaryRow* oracle = t.find("tau_g", "oracle");
  REQUIRE(oracle != nullptr);
  CHECK(std::isnan(oracle->sd));
}

TEST_CASE("summaries fail when too many replications fail") {
  const Study s(StudyDesign::TwoVar1, 1);
  auto results = run_replications(s, 0, 20, 1);
  results[3].failed = true;
  CHECK_THROWS_AS(summarize(s, results), Error);
}
