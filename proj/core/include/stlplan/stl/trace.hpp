#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace stlplan::stl {

/// Uniformly sampled multi-channel signal. All channels share one length.
class Trace {
 public:
  Trace(double dt, std::size_t length);

  double dt() const noexcept { return dt_; }
  std::size_t length() const noexcept { return length_; }

  /// Adds or replaces a channel. Throws ModelError on a length mismatch.
  void set_channel(const std::string& name, std::vector<double> values);

  bool has_channel(const std::string& name) const { return channels_.count(name) != 0; }
  /// Throws UnknownChannelError.
  std::span<const double> channel(const std::string& name) const;
  std::vector<std::string> channel_names() const;
  const std::map<std::string, std::vector<double>>& channels() const { return channels_; }

 private:
  double dt_;
  std::size_t length_;
  std::map<std::string, std::vector<double>> channels_;
};

}  // namespace stlplan::stl
