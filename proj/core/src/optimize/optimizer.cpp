#include "stlplan/optimize/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include "stlplan/error.hpp"

namespace stlplan::opt {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::uint64_t> first_primes(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < n; ++c) {
    bool prime = true;
    for (std::uint64_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  for (double scale = f; i > 0; i /= base, scale *= f) result += static_cast<double>(i % base) * scale;
  return result;
}

// Maps between the full parameter vector and the unit box over the free dimensions.
class Space {
 public:
  explicit Space(const Objective& obj) : lo_(obj.lo), hi_(obj.hi) {
    for (std::size_t d = 0; d < lo_.size(); ++d) {
      if (lo_[d] < hi_[d]) active_.push_back(d);
    }
  }

  std::size_t active() const { return active_.size(); }

  std::vector<double> to_full(const Eigen::VectorXd& u) const {
    std::vector<double> x = lo_;
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const std::size_t d = active_[a];
      x[d] = std::clamp(lo_[d] + u(static_cast<Eigen::Index>(a)) * (hi_[d] - lo_[d]), lo_[d], hi_[d]);
    }
    return x;
  }

  Eigen::VectorXd to_unit(const std::vector<double>& x) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(active_.size()));
    for (std::size_t a = 0; a < active_.size(); ++a) {
      const std::size_t d = active_[a];
      u(static_cast<Eigen::Index>(a)) = (x[d] - lo_[d]) / (hi_[d] - lo_[d]);
    }
    return u;
  }

  std::vector<double> clamp(std::vector<double> x) const {
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = std::clamp(x[d], lo_[d], hi_[d]);
    return x;
  }

 private:
  std::vector<double> lo_, hi_;
  std::vector<std::size_t> active_;
};

class Run {
 public:
  Run(const Objective& obj, const OptimizerConfig& cfg) : obj_(obj), cfg_(cfg), space_(obj), start_(Clock::now()) {}

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  bool should_stop() {
    if (evaluations_ >= cfg_.budget) return true;
    if (cfg_.stop_when_satisfied && have_best_ && result_.best_value > 0.0) return true;
    if (evaluations_ > 0 && cfg_.deadline_s && elapsed() >= *cfg_.deadline_s) {
      result_.deadline_hit = true;
      return true;
    }
    return false;
  }

  int remaining() const { return cfg_.budget - evaluations_; }

  // Evaluates up to `remaining()` points, concurrently when more than one.
  void evaluate(std::vector<std::vector<double>> xs) {
    if (static_cast<int>(xs.size()) > remaining()) xs.resize(static_cast<std::size_t>(remaining()));
    std::vector<double> values(xs.size());
    if (xs.size() == 1) {
      values[0] = obj_.evaluate(xs[0]);
    } else {
      std::vector<std::future<double>> futures;
      for (const auto& x : xs) {
        futures.push_back(std::async(std::launch::async, [this, &x] { return obj_.evaluate(x); }));
      }
      for (std::size_t i = 0; i < xs.size(); ++i) values[i] = futures[i].get();
    }
    const double now = elapsed();
    for (std::size_t i = 0; i < xs.size(); ++i) record(std::move(xs[i]), values[i], now);
  }

  const Space& space() const { return space_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }
  bool have_best() const { return have_best_; }
  double best_value() const { return result_.best_value; }
  const std::vector<double>& best_x() const { return result_.best_x; }

  OptResult finish() {
    if (!have_best_) throw ModelError("optimizer: no evaluation returned a finite value");
    result_.wall_time_total = elapsed();
    return std::move(result_);
  }

 private:
  void record(std::vector<double> x, double value, double now) {
    ++evaluations_;
    if (!std::isfinite(value)) {
      std::cerr << "optimizer: discarding non-finite objective value at evaluation " << evaluations_ << "\n";
      ++result_.discarded;
      if (evaluations_ == 1) result_.initial_value = -std::numeric_limits<double>::infinity();
      return;
    }
    if (evaluations_ == 1) result_.initial_value = value;
    result_.history.push_back({evaluations_, value, now});
    points_.push_back(space_.to_unit(x));
    values_.push_back(value);
    if (!have_best_ || value > result_.best_value) {
      have_best_ = true;
      result_.best_value = value;
      result_.best_x = std::move(x);
    }
  }

  const Objective& obj_;
  const OptimizerConfig& cfg_;
  Space space_;
  Clock::time_point start_;
  int evaluations_ = 0;
  bool have_best_ = false;
  std::vector<Eigen::VectorXd> points_;
  std::vector<double> values_;
  OptResult result_;
};

struct Scored {
  Eigen::VectorXd u;
  double ei;
  double stddev;
};

Eigen::VectorXd clip_unit(Eigen::VectorXd u) { return u.cwiseMax(0.0).cwiseMin(1.0); }

// Candidates from uniform draws and incumbent perturbations, the best few refined by
// a shrinking random local search; greedily picks `count` distinct maximizers of EI.
std::vector<Eigen::VectorXd> propose(const GpSurrogate& gp, const Run& run, const OptimizerConfig& cfg,
                                     std::mt19937_64& rng, int count) {
  const auto dim = static_cast<Eigen::Index>(run.space().active());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::VectorXd incumbent = run.space().to_unit(run.best_x());
  const double best = run.best_value();

  auto score = [&](Eigen::VectorXd u) {
    const GpPrediction p = gp.predict(u);
    return Scored{std::move(u), expected_improvement(p.mean, p.stddev, best), p.stddev};
  };

  std::vector<Scored> pool;
  const int n_cand = std::max(cfg.candidates, 1);
  for (int c = 0; c < n_cand; ++c) {
    Eigen::VectorXd u(dim);
    if (c < n_cand / 2) {
      for (Eigen::Index d = 0; d < dim; ++d) u(d) = unif(rng);
    } else {
      for (Eigen::Index d = 0; d < dim; ++d) u(d) = incumbent(d) + cfg.local_sigma * gauss(rng);
      u = clip_unit(std::move(u));
    }
    pool.push_back(score(std::move(u)));
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pool[a].ei > pool[b].ei; });
  const auto n_refine = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.refine_top, 0)), order.size());
  for (std::size_t r = 0; r < n_refine; ++r) {
    Scored cur = pool[order[r]];
    double step = cfg.local_sigma * 0.5;
    for (int s = 0; s < cfg.refine_steps; ++s) {
      Eigen::VectorXd u(dim);
      for (Eigen::Index d = 0; d < dim; ++d) u(d) = cur.u(d) + step * gauss(rng);
      Scored next = score(clip_unit(std::move(u)));
      if (next.ei > cur.ei) {
        cur = std::move(next);
      } else {
        step *= 0.7;
      }
    }
    pool.push_back(std::move(cur));
  }

  // When EI vanishes everywhere, fall back to the most uncertain candidate.
  const bool flat = std::all_of(pool.begin(), pool.end(), [](const Scored& s) { return s.ei <= 0.0; });
  std::stable_sort(pool.begin(), pool.end(), [flat](const Scored& a, const Scored& b) {
    return flat ? a.stddev > b.stddev : a.ei > b.ei;
  });

  std::vector<Eigen::VectorXd> chosen;
  auto distinct = [&](const Eigen::VectorXd& u) {
    for (const auto& p : run.points()) {
      if ((p - u).squaredNorm() < 1e-18) return false;
    }
    for (const auto& c : chosen) {
      if ((c - u).squaredNorm() < 1e-18) return false;
    }
    return true;
  };
  for (const auto& s : pool) {
    if (static_cast<int>(chosen.size()) >= count) break;
    if (distinct(s.u)) chosen.push_back(s.u);
  }
  while (static_cast<int>(chosen.size()) < count) {
    Eigen::VectorXd u(dim);
    for (Eigen::Index d = 0; d < dim; ++d) u(d) = unif(rng);
    chosen.push_back(std::move(u));
  }
  return chosen;
}

void validate(const Objective& obj, const OptimizerConfig& cfg) {
  if (!obj.evaluate) throw ModelError("optimizer: objective has no evaluate function");
  if (cfg.budget < 1) throw ModelError("optimizer: budget must be at least 1");
  if (cfg.batch < 1) throw ModelError("optimizer: batch must be at least 1");
  if (obj.lo.size() != obj.hi.size()) throw ModelError("optimizer: bound vectors differ in length");
  for (std::size_t d = 0; d < obj.lo.size(); ++d) {
    if (!std::isfinite(obj.lo[d]) || !std::isfinite(obj.hi[d]) || obj.lo[d] > obj.hi[d]) {
      throw ModelError("optimizer: bounds must be finite with lo <= hi (dimension " + std::to_string(d) + ")");
    }
  }
  if (obj.initial && obj.initial->size() != obj.lo.size()) {
    throw ModelError("optimizer: initial point has the wrong dimension");
  }
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "bayesian") return Method::kBayesian;
  if (name == "random") return Method::kRandom;
  throw ModelError("unknown optimizer method '" + name + "' (expected bayesian or random)");
}

std::string method_name(Method m) { return m == Method::kBayesian ? "bayesian" : "random"; }

std::vector<double> halton_point(std::uint64_t i, std::span<const double> shift) {
  const auto primes = first_primes(shift.size());
  std::vector<double> u(shift.size());
  for (std::size_t d = 0; d < shift.size(); ++d) {
    const double v = radical_inverse(i, primes[d]) + shift[d];
    u[d] = v - std::floor(v);
  }
  return u;
}

OptResult optimize(const Objective& obj, const OptimizerConfig& cfg) {
  validate(obj, cfg);
  Run run(obj, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t dim = run.space().active();

  auto uniform_point = [&] {
    Eigen::VectorXd u(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) u(static_cast<Eigen::Index>(d)) = unif(rng);
    return run.space().to_full(u);
  };

  std::vector<double> shift(dim);
  for (double& s : shift) s = unif(rng);
  const int n_init = cfg.n_init > 0 ? cfg.n_init : std::max<int>(5, static_cast<int>(dim));

  // Initial design: the supplied point first, then space-filling (or uniform) samples.
  std::vector<std::vector<double>> design;
  if (obj.initial) design.push_back(run.space().clamp(*obj.initial));
  const int n_design = cfg.method == Method::kBayesian ? n_init : cfg.budget;
  for (std::uint64_t i = 1; static_cast<int>(design.size()) < std::min(n_design, cfg.budget); ++i) {
    if (cfg.method == Method::kBayesian) {
      const auto h = halton_point(i, shift);
      design.push_back(run.space().to_full(Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(dim))));
    } else {
      design.push_back(uniform_point());
    }
  }

  std::size_t next = 0;
  while (next < design.size() && !run.should_stop()) {
    const std::size_t n = std::min<std::size_t>({static_cast<std::size_t>(cfg.batch), design.size() - next,
                                                 static_cast<std::size_t>(run.remaining())});
    run.evaluate({design.begin() + static_cast<std::ptrdiff_t>(next),
                  design.begin() + static_cast<std::ptrdiff_t>(next + n)});
    next += n;
  }

  while (!run.should_stop()) {
    const int count = std::min(cfg.batch, run.remaining());
    std::vector<std::vector<double>> xs;
    if (dim == 0) {
      xs.push_back(run.space().to_full(Eigen::VectorXd()));
    } else if (cfg.method == Method::kRandom || run.points().size() < 2 || !run.have_best()) {
      for (int c = 0; c < count; ++c) xs.push_back(uniform_point());
    } else {
      const GpSurrogate gp = gp_fit(run.points(), run.values(), cfg.gp);
      if (run.should_stop()) break;
      for (const auto& u : propose(gp, run, cfg, rng, count)) xs.push_back(run.space().to_full(u));
    }
    run.evaluate(std::move(xs));
  }
  return run.finish();
}

}  // namespace stlplan::opt
