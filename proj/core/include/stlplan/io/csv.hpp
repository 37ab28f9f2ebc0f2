#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace stlplan::io {

/// Numeric CSV with a header row. Empty cells read as NaN.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> header, std::vector<std::vector<double>> columns, std::string source);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  bool has_column(const std::string& name) const;
  /// Throws IoError naming the file when the column is absent.
  std::span<const double> column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> columns_;
  std::string source_;
};

/// Throws IoError with file:line on malformed content.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

/// Streams rows to a file. Numbers use the shortest round-trip representation.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::string path_;
};

/// Shortest round-trip text for a double; NaN becomes the empty string.
std::string format_cell(double v);

}  // namespace stlplan::io
