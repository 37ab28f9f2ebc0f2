#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stlplan/optimize/gp.hpp"

namespace stlplan::opt {

/// A maximization problem over a box. `evaluate` must be pure.
struct Objective {
  std::function<double(std::span<const double>)> evaluate;
  std::vector<double> lo;
  std::vector<double> hi;
  /// Evaluated first when present.
  std::optional<std::vector<double>> initial;

  std::size_t dimension() const { return lo.size(); }
};

enum class Method { kBayesian, kRandom };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct OptimizerConfig {
  Method method = Method::kBayesian;
  int budget = 60;
  std::uint64_t seed = 0;
  /// Wall-clock limit checked between evaluations; the first evaluation always runs.
  std::optional<double> deadline_s;
  bool stop_when_satisfied = false;
  /// Points proposed per surrogate fit; evaluated concurrently.
  int batch = 1;
  /// 0 means max(5, active dimension).
  int n_init = 0;
  int candidates = 256;
  int refine_top = 4;
  int refine_steps = 20;
  /// Stddev (unit-box units) of the incumbent perturbations among the candidates.
  double local_sigma = 0.1;
  GpConfig gp;
};

struct HistoryEntry {
  int iteration = 0;
  double value = 0.0;
  double wall_time_s = 0.0;
};

struct OptResult {
  std::vector<double> best_x;
  double best_value = 0.0;
  double initial_value = 0.0;
  std::vector<HistoryEntry> history;
  double wall_time_total = 0.0;
  /// Evaluations that returned a non-finite value.
  int discarded = 0;
  bool deadline_hit = false;
};

/// Maximizes obj. Dimensions with lo == hi are held fixed. Throws ModelError on
/// an empty budget, non-finite bounds, or if no evaluation produced a finite value.
OptResult optimize(const Objective& obj, const OptimizerConfig& cfg);

/// i-th point (i >= 1) of the Halton sequence in `dim` dimensions, shifted mod 1 by `shift`.
std::vector<double> halton_point(std::uint64_t i, std::span<const double> shift);

}  // namespace stlplan::opt
