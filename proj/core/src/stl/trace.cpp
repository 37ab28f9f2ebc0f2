#include "stlplan/stl/trace.hpp"

#include <cmath>

#include "stlplan/error.hpp"

namespace stlplan::stl {

Trace::Trace(double dt, std::size_t length) : dt_(dt), length_(length) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ModelError("trace dt must be positive");
  if (length == 0) throw ModelError("trace length must be at least 1");
}

void Trace::set_channel(const std::string& name, std::vector<double> values) {
  if (name.empty()) throw ModelError("empty channel name");
  if (values.size() != length_) {
    throw ModelError("channel '" + name + "' has " + std::to_string(values.size()) +
                     " samples, trace has " + std::to_string(length_));
  }
  channels_[name] = std::move(values);
}

std::span<const double> Trace::channel(const std::string& name) const {
  auto it = channels_.find(name);
  if (it == channels_.end()) throw UnknownChannelError(name);
  return it->second;
}

std::vector<std::string> Trace::channel_names() const {
  std::vector<std::string> out;
  out.reserve(channels_.size());
  for (const auto& [name, values] : channels_) out.push_back(name);
  return out;
}

}  // namespace stlplan::stl
