#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace stlplan::opt {

/// Hyper-parameter grid searched by log marginal likelihood.
struct GpConfig {
  std::vector<double> length_scales{0.05, 0.1, 0.2, 0.4, 0.8};
  std::vector<double> signal_vars{0.25, 1.0, 4.0};
  /// Multiply every length scale by sqrt(dimension); keeps the grid meaningful in the unit hypercube.
  bool scale_by_dimension = true;
  double noise_var = 1e-6;
  double jitter_start = 1e-8;
  double jitter_max = 1e-4;
};

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Squared-exponential GP over points in the unit box, outputs standardized internally.
class GpSurrogate {
 public:
  GpSurrogate(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, double length_scale, double signal_var,
              double noise_var);

  /// Posterior in the original output units.
  GpPrediction predict(const Eigen::VectorXd& x) const;

  double length_scale() const { return length_scale_; }
  double signal_var() const { return signal_var_; }
  /// Noise plus whatever jitter the factorization needed.
  double noise_var() const { return noise_var_; }
  double log_marginal_likelihood() const { return lml_; }
  Eigen::Index size() const { return inputs_.cols(); }

 private:
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  Eigen::MatrixXd inputs_;  // one column per point
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double length_scale_;
  double signal_var_;
  double noise_var_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

/// Picks (length scale, signal variance) from the grid with the best marginal
/// likelihood. Needs at least two points; throws ModelError if every
/// factorization fails even at the largest jitter.
GpSurrogate gp_fit(const std::vector<Eigen::VectorXd>& points, std::span<const double> values,
                   const GpConfig& cfg = {});

/// (m - best) Phi(z) + s phi(z), z = (m - best) / s; zero when s < 1e-12.
double expected_improvement(double mean, double stddev, double best);
double expected_improvement(const GpSurrogate& gp, const Eigen::VectorXd& x, double best);

}  // namespace stlplan::opt
