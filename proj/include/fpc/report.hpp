#pragma once

#include "fpc/montecarlo.hpp"

#include <string>
#include <vector>

namespace fpc {

// One coefficient (or APE) under one variance family.
struct EstimateRow {
  std::string target;
  std::string family;
  double estimate = 0.0;
  double se = 0.0;
  double dof = 0.0;
  double critical_value = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::string flags;  // ';'-separated
};

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(const std::string& name);

// Shortest text that reads back to the same double.
std::string format_double(double value);

std::string estimate_table(const std::vector<EstimateRow>& rows, OutputFormat format);
std::string summary_table(const SummaryTable& table, OutputFormat format);

// "-" writes to standard output.
void write_text(const std::string& path, const std::string& text);

}  // namespace fpc
