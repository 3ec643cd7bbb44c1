#include "fpc/csv.hpp"

#include "fpc/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fpc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Input, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

CsvTable CsvTable::parse(const std::string& text, const std::string& source) {
  CsvTable table;
  table.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
      for (auto& f : split_line(line)) table.header_.push_back(trim(f));
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header_.size())
      throw Error(ErrorCode::Input, source + ": line " + std::to_string(lineno) + " has " +
                                        std::to_string(fields.size()) + " fields, header has " +
                                        std::to_string(table.header_.size()));
    for (auto& f : fields) f = trim(f);
    table.cells_.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::Input, source + ": missing header row");
  return table;
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header_)
    if (h == name) return true;
  return false;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header_.size(); ++j)
    if (header_[j] == name) return static_cast<int>(j);
  throw Error(ErrorCode::Input, source_ + ": no column named '" + name + "'");
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
  const int j = column(name);
  std::vector<std::string> out;
  out.reserve(cells_.size());
  for (const auto& row : cells_) out.push_back(row[j]);
  return out;
}

Vector CsvTable::numeric(const std::string& name) const {
  const int j = column(name);
  Vector out(static_cast<Eigen::Index>(cells_.size()));
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const std::string& cell = cells_[i][j];
    double value = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last)
      throw Error(ErrorCode::Input, source_ + ": row " + std::to_string(i + 1) + ", column '" +
                                        name + "': cannot parse '" + cell + "' as a number");
    out(static_cast<Eigen::Index>(i)) = value;
  }
  return out;
}

Matrix CsvTable::numeric(const std::vector<std::string>& names) const {
  Matrix out(static_cast<Eigen::Index>(cells_.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.col(j) = numeric(names[j]);
  return out;
}

}  // namespace fpc
