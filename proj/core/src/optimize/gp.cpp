#include "stlplan/optimize/gp.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "stlplan/error.hpp"

namespace stlplan::opt {

GpSurrogate::GpSurrogate(Eigen::MatrixXd inputs, Eigen::VectorXd outputs, double length_scale, double signal_var,
                         double noise_var)
    : inputs_(std::move(inputs)), length_scale_(length_scale), signal_var_(signal_var), noise_var_(noise_var) {
  const Eigen::Index n = inputs_.cols();
  if (n < 1 || outputs.size() != n) throw ModelError("GP needs matching, non-empty inputs and outputs");
  if (!(length_scale > 0.0) || !(signal_var > 0.0) || !(noise_var >= 0.0)) {
    throw ModelError("GP hyper-parameters must be positive");
  }
  y_mean_ = outputs.mean();
  const double var = (outputs.array() - y_mean_).square().mean();
  y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd z = (outputs.array() - y_mean_) / y_scale_;

  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = signal_var_;
    for (Eigen::Index j = 0; j < i; ++j) gram(i, j) = gram(j, i) = kernel(inputs_.col(i), inputs_.col(j));
  }
  llt_.compute(gram + Eigen::MatrixXd::Identity(n, n) * noise_var_);
  if (llt_.info() != Eigen::Success) throw ModelError("GP Gram matrix is not positive definite");
  alpha_ = llt_.solve(z);
  const Eigen::MatrixXd& L = llt_.matrixLLT();
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(L(i, i));
  lml_ = -0.5 * z.dot(alpha_) - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double GpSurrogate::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return signal_var_ * std::exp(-0.5 * (a - b).squaredNorm() / (length_scale_ * length_scale_));
}

GpPrediction GpSurrogate::predict(const Eigen::VectorXd& x) const {
  const Eigen::Index n = inputs_.cols();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel(x, inputs_.col(i));
  const double mean_z = k.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k);
  const double var_z = std::max(0.0, signal_var_ - v.squaredNorm());
  return {y_mean_ + y_scale_ * mean_z, y_scale_ * std::sqrt(var_z)};
}

GpSurrogate gp_fit(const std::vector<Eigen::VectorXd>& points, std::span<const double> values, const GpConfig& cfg) {
  if (points.size() < 2) throw ModelError("GP fit needs at least two points");
  if (values.size() != points.size()) throw ModelError("GP fit: points and values differ in length");
  if (cfg.length_scales.empty() || cfg.signal_vars.empty()) throw ModelError("GP fit: empty hyper-parameter grid");
  const Eigen::Index dim = points.front().size();
  Eigen::MatrixXd X(dim, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = points[i];
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const double scale = cfg.scale_by_dimension ? std::sqrt(static_cast<double>(std::max<Eigen::Index>(dim, 1))) : 1.0;

  std::optional<GpSurrogate> best;
  for (double ell : cfg.length_scales) {
    for (double sf2 : cfg.signal_vars) {
      // Jitter escalates by decades until the factorization succeeds.
      for (double jitter = 0.0; jitter <= cfg.jitter_max * (1.0 + 1e-12);
           jitter = jitter == 0.0 ? cfg.jitter_start : jitter * 10.0) {
        try {
          GpSurrogate gp(X, y, ell * scale, sf2, cfg.noise_var + jitter);
          if (!best || gp.log_marginal_likelihood() > best->log_marginal_likelihood()) best = std::move(gp);
          break;
        } catch (const ModelError&) {
        }
      }
    }
  }
  if (!best) throw ModelError("GP fit: Cholesky failed for every hyper-parameter setting");
  return std::move(*best);
}

double expected_improvement(double mean, double stddev, double best) {
  if (!(stddev >= 1e-12)) return 0.0;
  const double z = (mean - best) / stddev;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return std::max(0.0, (mean - best) * cdf + stddev * pdf);
}

double expected_improvement(const GpSurrogate& gp, const Eigen::VectorXd& x, double best) {
  const GpPrediction p = gp.predict(x);
  return expected_improvement(p.mean, p.stddev, best);
}

}  // namespace stlplan::opt
