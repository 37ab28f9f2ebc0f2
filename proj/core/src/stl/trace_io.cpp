#include "stlplan/stl/trace_io.hpp"

#include <cmath>

#include "stlplan/error.hpp"
#include "stlplan/io/csv.hpp"

namespace stlplan::stl {

Trace read_trace_csv(const std::filesystem::path& path) {
  const io::CsvTable table = io::read_csv(path);
  const auto t = table.column("t");
  if (t.empty()) throw IoError(path.string() + ": trace has no rows");
  const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
  if (!(dt > 0.0)) throw IoError(path.string() + ": t column must be increasing");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::fabs(t[i] - t[i - 1] - dt) > 1e-6 * std::max(1.0, dt)) {
      throw IoError(path.string() + ":" + std::to_string(i + 2) + ": non-uniform t spacing");
    }
  }
  Trace trace(dt, t.size());
  for (const auto& name : table.header()) {
    if (name == "t") continue;
    const auto col = table.column(name);
    for (std::size_t i = 0; i < col.size(); ++i) {
      if (!std::isfinite(col[i])) {
        throw IoError(path.string() + ":" + std::to_string(i + 2) + ": missing value in channel '" + name + "'");
      }
    }
    trace.set_channel(name, {col.begin(), col.end()});
  }
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace, double t0) {
  std::vector<std::string> header{"t"};
  for (const auto& [name, values] : trace.channels()) header.push_back(name);
  io::CsvWriter w(path, header);
  std::vector<double> row(header.size());
  for (std::size_t k = 0; k < trace.length(); ++k) {
    row[0] = t0 + static_cast<double>(k) * trace.dt();
    std::size_t c = 1;
    for (const auto& [name, values] : trace.channels()) row[c++] = values[k];
    w.row(row);
  }
}

}  // namespace stlplan::stl
