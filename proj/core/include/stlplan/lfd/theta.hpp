#pragma once

#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stlplan/geometry.hpp"
#include "stlplan/lfd/hsmm.hpp"

namespace stlplan::lfd {

/// Where each block of the flat optimisation vector lives.
///
///   [0, K*K)            transition logits, row-major
///   [K*K, K*K + 2K)     means (x, y) per component
///   [K*K + 2K, K*K+3K)  log duration mean (steps)
struct ThetaLayout {
  int K = 0;
  /// Logits at or below this value encode a structural zero transition.
  double logit_floor = -10.0;

  std::size_t trans_offset() const { return 0; }
  std::size_t means_offset() const { return static_cast<std::size_t>(K) * K; }
  std::size_t dur_offset() const { return means_offset() + 2 * static_cast<std::size_t>(K); }
  std::size_t size() const { return dur_offset() + static_cast<std::size_t>(K); }

  friend bool operator==(const ThetaLayout&, const ThetaLayout&) = default;
};

/// The optimisable subset of the model: transitions, (x, y) means, duration means.
struct ParamVector {
  std::vector<double> values;
  ThetaLayout layout;
  std::vector<std::pair<double, double>> bounds;
};

struct ThetaBoundsConfig {
  /// Means are kept inside map_bounds expanded by map_margin when a map is given.
  std::optional<Box> map_bounds;
  double map_margin = 1.0;
  /// Additionally keep each mean within this distance (per axis) of its fitted value.
  double mean_radius = std::numeric_limits<double>::infinity();
  /// Upper duration bound in steps (log-encoded); 0 picks max(2, 2 * sum(dur_mean)).
  double max_duration_steps = 0.0;
  /// Additionally keep each log duration within this distance of its fitted value.
  double log_duration_radius = std::numeric_limits<double>::infinity();
  double logit_limit = 10.0;
  /// Pin floor-valued logits so the search never creates new transitions.
  bool freeze_structural_zeros = false;
};

/// Encodes the optimisable parameters. Transition probabilities become logits
/// log(p) clamped to [-logit_limit, logit_limit]; probabilities below
/// exp(-logit_limit) are treated as structural zeros.
ParamVector extract_theta(const HsmmModel& model, const ThetaBoundsConfig& cfg = {});

/// Returns a copy of `model` with the parameters in `theta` applied. Transition
/// rows are the softmax of their logits with floor-valued logits held at zero
/// (unless the whole row is at the floor). Throws ModelError on a layout mismatch.
HsmmModel apply_theta(const HsmmModel& model, const ParamVector& theta);
HsmmModel apply_theta(const HsmmModel& model, const ThetaLayout& layout, std::span<const double> values);

}  // namespace stlplan::lfd
