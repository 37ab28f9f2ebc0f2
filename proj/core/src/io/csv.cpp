#include "stlplan/io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "stlplan/error.hpp"
#include "stlplan/stl/parse.hpp"

namespace stlplan::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header, std::vector<std::vector<double>> columns, std::string source)
    : header_(std::move(header)), columns_(std::move(columns)), source_(std::move(source)) {}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

std::span<const double> CsvTable::column(const std::string& name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw IoError(source_ + ": missing column '" + name + "'");
  return columns_[static_cast<std::size_t>(it - header_.begin())];
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    for (auto& c : cells) c = trim(c);
    if (header.empty()) {
      header = cells;
      columns.resize(header.size());
      continue;
    }
    if (cells.size() != header.size()) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                    " fields, found " + std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (c.empty() || c == "-") {
        columns[i].push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw IoError(source + ":" + std::to_string(line_no) + ": field '" + header[i] + "' is not a number: '" + c +
                      "'");
      }
      columns[i].push_back(v);
    }
  }
  if (header.empty()) throw IoError(source + ": empty CSV");
  return CsvTable(std::move(header), std::move(columns), source);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

std::string format_cell(double v) {
  if (std::isnan(v)) return {};
  return stl::format_number(v);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path.string()) {
  if (!out_) throw IoError(path_ + ": cannot open for writing");
  row_text(header);
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << format_cell(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace stlplan::io
