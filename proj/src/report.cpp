#include "fpc/report.hpp"

#include "fpc/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fpc {

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw Error(ErrorCode::Input, "unknown output format '" + name + "' (expected csv or json)");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

// JSON has no NaN; non-finite values become null.
nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string estimate_table(const std::vector<EstimateRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"target", r.target},
                     {"family", r.family},
                     {"estimate", number(r.estimate)},
                     {"se", number(r.se)},
                     {"dof", number(r.dof)},
                     {"critical_value", number(r.critical_value)},
                     {"ci_lower", number(r.ci_lower)},
                     {"ci_upper", number(r.ci_upper)},
                     {"flags", r.flags}});
    return arr.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "target,family,estimate,se,dof,critical_value,ci_lower,ci_upper,flags\n";
  for (const auto& r : rows)
    out << quote_csv(r.target) << ',' << quote_csv(r.family) << ',' << format_double(r.estimate)
        << ',' << format_double(r.se) << ',' << format_double(r.dof) << ','
        << format_double(r.critical_value) << ',' << format_double(r.ci_lower) << ','
        << format_double(r.ci_upper) << ',' << quote_csv(r.flags) << '\n';
  return out.str();
}

std::string summary_table(const SummaryTable& table, OutputFormat format) {
  if (format == OutputFormat::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : table.rows)
      arr.push_back({{"design", table.design},
                     {"seed", table.seed},
                     {"target", r.target},
                     {"family", r.family},
                     {"truth", number(r.truth)},
                     {"mean_se", number(r.mean_se)},
                     {"coverage", number(r.coverage)},
                     {"sd", number(r.sd)},
                     {"reps", r.reps},
                     {"nan_se", r.nan_se}});
    return arr.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "target,family,truth,mean_se,coverage,sd,reps,nan_se\n";
  for (const auto& r : table.rows)
    out << quote_csv(r.target) << ',' << quote_csv(r.family) << ',' << format_double(r.truth) << ','
        << format_double(r.mean_se) << ',' << format_double(r.coverage) << ','
        << format_double(r.sd) << ',' << r.reps << ',' << r.nan_se << '\n';
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw Error(ErrorCode::Input, "failed writing to standard output");
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Input, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::Input, "failed writing '" + path + "'");
}

}  // namespace fpc
