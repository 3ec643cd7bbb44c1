#pragma once

#include "fpc/linalg.hpp"

#include <string>
#include <vector>

namespace fpc {

// Comma-separated text with a mandatory header row. Fields are not quoted;
// '.' is the decimal separator.
class CsvTable {
 public:
  static CsvTable read(const std::string& path);
  static CsvTable parse(const std::string& text, const std::string& source = "<memory>");

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return cells_.size(); }

  int column(const std::string& name) const;  // throws when missing
  bool has_column(const std::string& name) const;

  std::vector<std::string> strings(const std::string& name) const;
  Vector numeric(const std::string& name) const;
  Matrix numeric(const std::vector<std::string>& names) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> cells_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace fpc
