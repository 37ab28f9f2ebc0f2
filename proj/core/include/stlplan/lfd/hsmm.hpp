#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stlplan/geometry.hpp"

namespace stlplan::lfd {

/// One recorded run: poses sampled every dt seconds, alpha wrapped to (-pi, pi].
struct Demonstration {
  double dt = 0.1;
  std::vector<Pose> states;
};

/// Hidden semi-Markov model over (x, y, alpha) with Gaussian state durations.
///
/// Component indices are 0-based. Durations are measured in steps.
struct HsmmModel {
  int K = 0;
  double dt = 0.1;
  Eigen::MatrixXd trans;                 // K x K, row-stochastic
  std::vector<Eigen::Vector3d> means;    // (x, y, alpha)
  std::vector<Eigen::Matrix3d> covs;     // symmetric positive definite
  std::vector<double> dur_mean;          // >= 1 step
  std::vector<double> dur_var;           // > 0 steps^2
  /// Median time (seconds from demo start) of the samples assigned to each
  /// component during fitting. Empty when unknown; NaN for unused components.
  std::vector<double> component_times;

  /// Throws ModelError when any invariant is broken.
  void validate() const;
};

/// Label sequence z_t (0-based component indices).
using StateSeq = std::vector<int>;

struct FitOptions {
  int K = 6;
  std::uint64_t seed = 0;
  int max_iters = 100;
  /// Stop once the per-sample log-likelihood improves by less than this.
  double tol = 1e-6;
  /// Standard deviation (metres / radians) of seeded noise added to the initial
  /// means. Zero keeps initialization a pure function of the demonstrations.
  double init_jitter = 0.0;
};

struct FitReport {
  /// Total log-likelihood after initialization and after every EM iteration.
  std::vector<double> log_likelihood;
  int iterations = 0;
  /// Per-demo most-likely labels under the final mixture.
  std::vector<StateSeq> labels;
};

/// Fits the model with EM on a Gaussian mixture initialised by uniform time
/// segmentation; transitions and durations come from the resulting labels.
/// Throws ModelError on inconsistent input or a singular covariance.
HsmmModel fit_hsmm(std::span<const Demonstration> demos, const FitOptions& opts, FitReport* report = nullptr);

/// Duration-aware Viterbi decoding of a demonstration.
StateSeq decode_states(const HsmmModel& model, const Demonstration& demo);

/// Log-density of a pose under component j (angle difference wrapped).
double component_log_density(const HsmmModel& model, int j, const Pose& p);

struct Segment {
  int component = 0;
  int steps = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Deterministic component plan: start at the most likely component for
/// `start`, stay round(dur_mean) steps, move to the strongest off-diagonal
/// successor. Durations sum to exactly `horizon_steps`.
std::vector<Segment> component_sequence(const HsmmModel& model, const Pose& start, int horizon_steps);

}  // namespace stlplan::lfd
