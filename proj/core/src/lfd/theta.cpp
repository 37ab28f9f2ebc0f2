#include "stlplan/lfd/theta.hpp"

#include <algorithm>
#include <cmath>

#include "stlplan/error.hpp"

namespace stlplan::lfd {

ParamVector extract_theta(const HsmmModel& model, const ThetaBoundsConfig& cfg) {
  model.validate();
  const int K = model.K;
  ParamVector theta;
  theta.layout.K = K;
  theta.layout.logit_floor = -cfg.logit_limit;
  theta.values.resize(theta.layout.size());
  theta.bounds.resize(theta.layout.size());

  const double floor_p = std::exp(-cfg.logit_limit);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const std::size_t idx = theta.layout.trans_offset() + static_cast<std::size_t>(i) * K + j;
      const double p = model.trans(i, j);
      theta.values[idx] = p >= floor_p ? std::clamp(std::log(p), -cfg.logit_limit, cfg.logit_limit) : -cfg.logit_limit;
      const bool frozen = cfg.freeze_structural_zeros && theta.values[idx] <= -cfg.logit_limit;
      theta.bounds[idx] = frozen ? std::pair{-cfg.logit_limit, -cfg.logit_limit}
                                 : std::pair{-cfg.logit_limit, cfg.logit_limit};
    }
  }

  for (int j = 0; j < K; ++j) {
    for (int axis = 0; axis < 2; ++axis) {
      const std::size_t idx = theta.layout.means_offset() + 2 * static_cast<std::size_t>(j) + axis;
      const double mu = model.means[j](axis);
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      if (cfg.map_bounds) {
        lo = (axis == 0 ? cfg.map_bounds->x_lb : cfg.map_bounds->y_lb) - cfg.map_margin;
        hi = (axis == 0 ? cfg.map_bounds->x_ub : cfg.map_bounds->y_ub) + cfg.map_margin;
      }
      if (std::isfinite(cfg.mean_radius)) {
        lo = std::max(lo, mu - cfg.mean_radius);
        hi = std::min(hi, mu + cfg.mean_radius);
      }
      if (!std::isfinite(lo)) lo = mu - 10.0;
      if (!std::isfinite(hi)) hi = mu + 10.0;
      if (lo > hi) std::swap(lo, hi);
      theta.values[idx] = mu;
      theta.bounds[idx] = {std::min(lo, mu), std::max(hi, mu)};
    }
  }

  double max_steps = cfg.max_duration_steps;
  if (!(max_steps > 0.0)) {
    double total = 0.0;
    for (double d : model.dur_mean) total += d;
    max_steps = std::max(2.0, 2.0 * total);
  }
  const double log_max = std::log(std::max(max_steps, 1.0));
  for (int j = 0; j < K; ++j) {
    const std::size_t idx = theta.layout.dur_offset() + j;
    theta.values[idx] = std::log(model.dur_mean[j]);
    double lo = 0.0;
    double hi = std::max(log_max, theta.values[idx]);
    if (std::isfinite(cfg.log_duration_radius)) {
      lo = std::max(lo, theta.values[idx] - cfg.log_duration_radius);
      hi = std::min(hi, theta.values[idx] + cfg.log_duration_radius);
    }
    theta.bounds[idx] = {lo, hi};
  }
  return theta;
}

HsmmModel apply_theta(const HsmmModel& model, const ThetaLayout& layout, std::span<const double> values) {
  if (layout.K != model.K || values.size() != layout.size()) {
    throw ModelError("parameter vector layout does not match the model (K = " + std::to_string(model.K) + ")");
  }
  const int K = model.K;
  HsmmModel out = model;
  const double floor_eps = 1e-12 * std::max(1.0, std::fabs(layout.logit_floor));
  for (int i = 0; i < K; ++i) {
    const auto row = values.subspan(layout.trans_offset() + static_cast<std::size_t>(i) * K, K);
    bool any_live = false;
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : row) {
      if (v > layout.logit_floor + floor_eps) {
        any_live = true;
        peak = std::max(peak, v);
      }
    }
    double sum = 0.0;
    for (int j = 0; j < K; ++j) {
      const bool live = !any_live || row[j] > layout.logit_floor + floor_eps;
      const double e = live ? std::exp(row[j] - (any_live ? peak : layout.logit_floor)) : 0.0;
      out.trans(i, j) = e;
      sum += e;
    }
    out.trans.row(i) /= sum;
  }
  for (int j = 0; j < K; ++j) {
    out.means[j](0) = values[layout.means_offset() + 2 * static_cast<std::size_t>(j)];
    out.means[j](1) = values[layout.means_offset() + 2 * static_cast<std::size_t>(j) + 1];
    out.dur_mean[j] = std::max(1.0, std::exp(values[layout.dur_offset() + j]));
  }
  return out;
}

HsmmModel apply_theta(const HsmmModel& model, const ParamVector& theta) {
  return apply_theta(model, theta.layout, theta.values);
}

}  // namespace stlplan::lfd
