#pragma once

#include <filesystem>

#include "stlplan/stl/trace.hpp"

namespace stlplan::stl {

/// CSV with a `t` column (uniform spacing) and one column per channel.
/// A single-row file gets dt = 1. Throws IoError with file:line context.
Trace read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace, double t0 = 0.0);

}  // namespace stlplan::stl
