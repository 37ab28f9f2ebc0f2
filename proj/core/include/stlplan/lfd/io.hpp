#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stlplan/lfd/hsmm.hpp"

namespace stlplan::lfd {

/// Reads a `t,x,y,alpha` CSV. dt is taken from the (uniform) t column.
/// Throws IoError naming the file and line on malformed input.
Demonstration read_demonstration_csv(const std::filesystem::path& path);
void write_demonstration_csv(const std::filesystem::path& path, const Demonstration& demo);

/// All `*.csv` files of a directory in lexicographic order.
std::vector<Demonstration> read_demonstration_dir(const std::filesystem::path& dir);

std::string model_to_json(const HsmmModel& model);
HsmmModel model_from_json(const std::string& text);
void write_model(const std::filesystem::path& path, const HsmmModel& model);
HsmmModel read_model(const std::filesystem::path& path);

}  // namespace stlplan::lfd
