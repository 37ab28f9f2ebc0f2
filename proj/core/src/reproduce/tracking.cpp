#include "stlplan/reproduce/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "stlplan/error.hpp"

namespace stlplan::reproduce {

namespace {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat2 = Eigen::Matrix2d;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat32 = Eigen::Matrix<double, 3, 2>;

Vec3 state_error(const UnicycleState& s, const Pose& target) {
  return {s.x - target.x, s.y - target.y, wrap_angle(s.alpha - target.alpha)};
}

Pose lerp_pose(const Pose& a, const Pose& b, double f) {
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), wrap_angle(a.alpha + f * wrap_angle(b.alpha - a.alpha))};
}

Pose mean_pose(const lfd::HsmmModel& m, int j) { return {m.means[j](0), m.means[j](1), m.means[j](2)}; }

struct Rollout {
  std::vector<UnicycleState> states;
  std::vector<ControlInput> controls;
  double cost = 0.0;
};

class Ilqr {
 public:
  Ilqr(const ReferencePath& ref, const UnicycleState& start, const TrackerConfig& cfg)
      : ref_(ref), start_(start), cfg_(cfg), horizon_(ref.points.size()) {
    Q_ = cfg.q_diag.asDiagonal();
    R_ = cfg.r_diag.asDiagonal();
    Qf_ = cfg.terminal_scale * Q_;
  }

  double cost(const std::vector<UnicycleState>& xs, const std::vector<ControlInput>& us) const {
    double c = 0.0;
    for (std::size_t k = 0; k < horizon_; ++k) {
      const Vec2 u(us[k].v, us[k].omega);
      c += u.dot(R_ * u);
      const Vec3 e = state_error(xs[k + 1], ref_.points[k]);
      c += e.dot((k + 1 == horizon_ ? Qf_ : Q_) * e);
    }
    return c;
  }

  Rollout initial() const {
    Rollout r;
    r.controls.assign(horizon_, ControlInput{});
    r.states.resize(horizon_ + 1);
    r.states[0] = start_;
    for (std::size_t k = 0; k < horizon_; ++k) {
      r.states[k + 1] = step_unicycle(r.states[k], r.controls[k], ref_.dt, cfg_.limits);
    }
    r.cost = cost(r.states, r.controls);
    return r;
  }

  /// Backward pass; returns false when Q_uu is not positive definite at some step.
  bool backward(const Rollout& r, double mu) {
    ff_.resize(horizon_);
    fb_.resize(horizon_);
    const double dt = ref_.dt;
    Vec3 vx = 2.0 * Qf_ * state_error(r.states[horizon_], ref_.points[horizon_ - 1]);
    Mat3 vxx = 2.0 * Qf_;
    for (std::size_t kk = horizon_; kk-- > 0;) {
      const auto& s = r.states[kk];
      const auto& u = r.controls[kk];
      const double ca = std::cos(s.alpha);
      const double sa = std::sin(s.alpha);
      Mat3 A = Mat3::Identity();
      A(0, 2) = -u.v * sa * dt;
      A(1, 2) = u.v * ca * dt;
      Mat32 B = Mat32::Zero();
      B(0, 0) = ca * dt;
      B(1, 0) = sa * dt;
      B(2, 1) = dt;

      Vec3 lx = Vec3::Zero();
      Mat3 lxx = Mat3::Zero();
      if (kk > 0) {
        lx = 2.0 * Q_ * state_error(s, ref_.points[kk - 1]);
        lxx = 2.0 * Q_;
      }
      const Vec2 uv(u.v, u.omega);
      const Vec2 lu = 2.0 * R_ * uv;
      const Mat2 luu = 2.0 * R_;

      const Vec3 qx = lx + A.transpose() * vx;
      const Vec2 qu = lu + B.transpose() * vx;
      const Mat3 qxx = lxx + A.transpose() * vxx * A;
      const Mat2 quu = luu + B.transpose() * vxx * B + mu * Mat2::Identity();
      const Mat23 qux = B.transpose() * vxx * A;

      Eigen::LLT<Mat2> llt(quu);
      if (llt.info() != Eigen::Success) return false;
      const Vec2 k = -llt.solve(qu);
      const Mat23 K = -llt.solve(qux);
      ff_[kk] = k;
      fb_[kk] = K;

      vx = qx + K.transpose() * quu * k + K.transpose() * qu + qux.transpose() * k;
      vxx = qxx + K.transpose() * quu * K + K.transpose() * qux + qux.transpose() * K;
      vxx = 0.5 * (vxx + vxx.transpose());
    }
    return true;
  }

  Rollout forward(const Rollout& r, double step) const {
    Rollout out;
    out.states.resize(horizon_ + 1);
    out.controls.resize(horizon_);
    out.states[0] = start_;
    for (std::size_t k = 0; k < horizon_; ++k) {
      const Vec3 dx = state_error(out.states[k], r.states[k]);
      const Vec2 du = step * ff_[k] + fb_[k] * dx;
      out.controls[k] = cfg_.limits.clamp({r.controls[k].v + du(0), r.controls[k].omega + du(1)});
      out.states[k + 1] = step_unicycle(out.states[k], out.controls[k], ref_.dt, cfg_.limits);
    }
    out.cost = cost(out.states, out.controls);
    return out;
  }

 private:
  const ReferencePath& ref_;
  UnicycleState start_;
  const TrackerConfig& cfg_;
  std::size_t horizon_;
  Mat3 Q_;
  Mat2 R_;
  Mat3 Qf_;
  std::vector<Vec2> ff_;
  std::vector<Mat23> fb_;
};

}  // namespace

ControlInput KinematicLimits::clamp(ControlInput u) const {
  return {std::clamp(u.v, -v_max, v_max), std::clamp(u.omega, -omega_max, omega_max)};
}

UnicycleState step_unicycle(const UnicycleState& s, ControlInput u, double dt, const KinematicLimits& limits) {
  if (!(dt > 0.0)) throw ModelError("dt must be positive");
  u = limits.clamp(u);
  return {s.x + u.v * std::cos(s.alpha) * dt, s.y + u.v * std::sin(s.alpha) * dt, wrap_angle(s.alpha + u.omega * dt)};
}

ReferencePath build_reference(const lfd::HsmmModel& model, const UnicycleState& start, int horizon_steps,
                              ReferenceMode mode) {
  const auto plan = lfd::component_sequence(model, start, horizon_steps);
  ReferencePath ref;
  ref.dt = model.dt;
  ref.points.reserve(static_cast<std::size_t>(horizon_steps));
  Pose from = start;
  for (const auto& seg : plan) {
    const Pose target = mean_pose(model, seg.component);
    for (int s = 0; s < seg.steps; ++s) {
      if (mode == ReferenceMode::kStepwise) {
        ref.points.push_back(target);
      } else {
        ref.points.push_back(lerp_pose(from, target, static_cast<double>(s + 1) / seg.steps));
      }
    }
    from = target;
  }
  return ref;
}

std::vector<double> waypoint_errors(const lfd::HsmmModel& model, const Trajectory& traj, const UnicycleState& start,
                                    int horizon_steps) {
  if (traj.states.empty()) throw ModelError("cannot measure an empty trajectory");
  std::vector<double> out;
  std::size_t k = 0;
  for (const auto& seg : lfd::component_sequence(model, start, horizon_steps)) {
    const auto& mu = model.means[seg.component];
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < seg.steps; ++i) {
      const auto& st = traj.states[std::min(k + 1 + static_cast<std::size_t>(i), traj.states.size() - 1)];
      best = std::min(best, std::hypot(st.x - mu(0), st.y - mu(1)));
    }
    k += static_cast<std::size_t>(seg.steps);
    out.push_back(best);
  }
  return out;
}

double tracking_cost(const Trajectory& traj, const ReferencePath& ref, const TrackerConfig& cfg) {
  if (traj.states.size() != ref.points.size() + 1 || traj.controls.size() != ref.points.size()) {
    throw ModelError("trajectory and reference lengths differ");
  }
  return Ilqr(ref, traj.states.front(), cfg).cost(traj.states, traj.controls);
}

Trajectory ilqr_track(const ReferencePath& ref, const UnicycleState& start, const TrackerConfig& cfg,
                      TrackDiagnostics* diag) {
  if (ref.points.empty()) throw ModelError("reference path is empty");
  if (cfg.iters < 1) throw ModelError("iLQR needs at least one iteration");
  Ilqr solver(ref, start, cfg);
  Rollout current = solver.initial();
  if (!std::isfinite(current.cost)) throw ModelError("iLQR: non-finite initial cost");
  TrackDiagnostics local;
  TrackDiagnostics& d = diag != nullptr ? *diag : local;
  d = TrackDiagnostics{};
  d.cost_history.push_back(current.cost);

  double mu = 1e-6;
  bool converged = false;
  for (int it = 0; it < cfg.iters && !converged; ++it) {
    while (!solver.backward(current, mu)) {
      mu *= 10.0;
      if (mu > 1e10) throw ModelError("iLQR: regularization diverged");
    }
    bool accepted = false;
    double step = 1.0;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      Rollout trial = solver.forward(current, step);
      if (!std::isfinite(trial.cost)) continue;
      if (trial.cost < current.cost) {
        const double improvement = (current.cost - trial.cost) / std::max(current.cost, 1e-12);
        current = std::move(trial);
        d.cost_history.push_back(current.cost);
        accepted = true;
        converged = improvement < cfg.rel_tol;
        break;
      }
    }
    d.iterations = it + 1;
    if (!accepted) {
      mu *= 10.0;
      if (mu > 1e6) break;
    } else {
      mu = std::max(1e-6, mu * 0.5);
    }
  }
  if (!std::isfinite(current.cost)) throw ModelError("iLQR: non-finite cost");

  Trajectory out;
  out.dt = ref.dt;
  out.states = std::move(current.states);
  out.controls = std::move(current.controls);
  return out;
}

stl::Trace trajectory_to_trace(const Trajectory& traj, const std::map<std::string, std::vector<double>>& world_channels) {
  const std::size_t n = traj.states.size();
  stl::Trace trace(traj.dt, n);
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  std::vector<double> as(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = traj.states[k].x;
    ys[k] = traj.states[k].y;
    as[k] = traj.states[k].alpha;
  }
  for (const auto& [name, values] : world_channels) {
    if (values.size() != n) {
      throw ModelError("world channel '" + name + "' has " + std::to_string(values.size()) +
                       " samples, trajectory has " + std::to_string(n));
    }
    trace.set_channel(name, values);
  }
  trace.set_channel("ego_x", std::move(xs));
  trace.set_channel("ego_y", std::move(ys));
  trace.set_channel("ego_alpha", std::move(as));
  return trace;
}

}  // namespace stlplan::reproduce
