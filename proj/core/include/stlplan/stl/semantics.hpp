#pragma once

#include <cstddef>
#include <span>

#include "stlplan/stl/formula.hpp"
#include "stlplan/stl/trace.hpp"

namespace stlplan::stl {

/// Inclusive range of sample indices.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const noexcept { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Samples k with t + ceil(lo/dt) <= k <= t + floor(hi/dt), clamped to the trace.
/// Endpoints within 1e-9 (relative) of a sample are snapped to it before rounding.
/// Throws EmptyWindowError if nothing remains after clamping.
IndexRange interval_to_indices(const Interval& iv, std::size_t t, std::size_t length, double dt);
IndexRange interval_to_indices(const Interval& iv, std::size_t t, const Trace& trace);

/// Margin of an atom at sample t. Throws UnknownChannelError.
double eval_atom(const Atom& a, const Trace& trace, std::size_t t);

/// Boolean satisfaction (atoms are true iff their margin is strictly positive).
bool eval_bool(const Formula& f, const Trace& trace, std::size_t t);

/// Classical space robustness (min/max semantics).
double robustness(const Formula& f, const Trace& trace, std::size_t t);

/// Smooth m-way conjunction of operand robustness values.
///
/// With r_min the smallest operand and r~_i = (r_i - r_min) / r_min:
///   r_min < 0:  sum_i r_min e^{r~_i} e^{nu r~_i} / sum_i e^{nu r~_i}
///   r_min > 0:  sum_i r_i e^{-nu r~_i} / sum_i e^{-nu r~_i}
///   r_min = 0:  0
/// Throws ModelError for nu <= 0 or an empty operand list.
double smooth_and(std::span<const double> values, double nu);
/// Dual of smooth_and: -smooth_and(-values).
double smooth_or(std::span<const double> values, double nu);

/// Smooth robustness. Nested conjunctions (disjunctions) are flattened into one
/// m-way smooth_and (smooth_or); G aggregates its window with smooth_and, F with
/// smooth_or; until replaces every min/max of the classical form by its smooth
/// counterpart. Negation flips the sign, which coincides with evaluating the
/// negation normal form under the De Morgan duals above.
double smooth_robustness(const Formula& f, const Trace& trace, std::size_t t, double nu);

enum class Semantics { kClassical, kSmooth };

struct RobustnessConfig {
  double nu = 5.0;
  Semantics semantics = Semantics::kSmooth;
};

/// Dispatches to robustness() or smooth_robustness().
double evaluate(const Formula& f, const Trace& trace, std::size_t t, const RobustnessConfig& cfg);

}  // namespace stlplan::stl
