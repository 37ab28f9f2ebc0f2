#include "stlplan/lfd/hsmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "stlplan/error.hpp"

namespace stlplan::lfd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDurationVarFloor = 0.25;
constexpr double kCovAbsFloor = 1e-6;

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Eigen::Vector3d to_vec(const Pose& p) { return {p.x, p.y, p.alpha}; }

Eigen::Vector3d diff(const Eigen::Vector3d& x, const Eigen::Vector3d& mu) {
  return {x(0) - mu(0), x(1) - mu(1), wrap_angle(x(2) - mu(2))};
}

/// Cached Cholesky factor of one component covariance.
struct GaussianFactor {
  Eigen::LLT<Eigen::Matrix3d> llt;
  double log_norm = 0.0;

  explicit GaussianFactor(const Eigen::Matrix3d& cov) : llt(cov) {
    if (llt.info() != Eigen::Success) throw ModelError("covariance is not positive definite");
    const Eigen::Matrix3d L = llt.matrixL();
    double log_det = 0.0;
    for (int i = 0; i < 3; ++i) log_det += 2.0 * std::log(L(i, i));
    log_norm = -0.5 * log_det - 1.5 * std::log(2.0 * std::numbers::pi);
  }

  double log_density(const Eigen::Vector3d& d) const {
    const Eigen::Vector3d z = llt.matrixL().solve(d);
    return log_norm - 0.5 * z.squaredNorm();
  }
};

std::vector<GaussianFactor> factorize(const HsmmModel& m) {
  std::vector<GaussianFactor> out;
  out.reserve(m.covs.size());
  for (const auto& c : m.covs) out.emplace_back(c);
  return out;
}

// Raises eigenvalues below the floor and leaves a well-conditioned covariance
// untouched, so the M-step stays an exact maximizer and EM stays monotone.
Eigen::Matrix3d regularize(Eigen::Matrix3d cov) {
  cov = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues().minCoeff() >= kCovAbsFloor) return cov;
  const Eigen::Vector3d lambda = eig.eigenvalues().cwiseMax(kCovAbsFloor);
  cov = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (cov + cov.transpose());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Sample {
  Eigen::Vector3d x;
  std::size_t demo;
  std::size_t t;
};

/// Weighted Gaussian estimate. Angles are averaged as wrapped offsets from `ref_alpha`.
void weighted_gaussian(const std::vector<Sample>& samples, std::span<const double> w, double ref_alpha,
                       Eigen::Vector3d& mean, Eigen::Matrix3d& cov) {
  double total = 0.0;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (w[n] == 0.0) continue;
    total += w[n];
    acc(0) += w[n] * samples[n].x(0);
    acc(1) += w[n] * samples[n].x(1);
    acc(2) += w[n] * wrap_angle(samples[n].x(2) - ref_alpha);
  }
  mean = {acc(0) / total, acc(1) / total, wrap_angle(ref_alpha + acc(2) / total)};
  cov.setZero();
  for (std::size_t n = 0; n < samples.size(); ++n) {
    if (w[n] == 0.0) continue;
    const Eigen::Vector3d d = diff(samples[n].x, mean);
    cov += w[n] * d * d.transpose();
  }
  cov /= total;
}

double circular_mean(const std::vector<Sample>& samples, std::span<const double> w) {
  double s = 0.0;
  double c = 0.0;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    s += w[n] * std::sin(samples[n].x(2));
    c += w[n] * std::cos(samples[n].x(2));
  }
  return std::atan2(s, c);
}

void validate_demos(std::span<const Demonstration> demos, int K) {
  if (demos.empty()) throw ModelError("no demonstrations");
  if (K < 1) throw ModelError("component count must be at least 1");
  const double dt = demos.front().dt;
  std::size_t total = 0;
  std::size_t shortest = std::numeric_limits<std::size_t>::max();
  for (const auto& d : demos) {
    if (!(d.dt > 0.0)) throw ModelError("demonstration dt must be positive");
    if (std::fabs(d.dt - dt) > 1e-9 * std::max(1.0, dt)) throw ModelError("demonstrations must share dt");
    if (d.states.size() < 2) throw ModelError("demonstrations need at least 2 samples");
    total += d.states.size();
    shortest = std::min(shortest, d.states.size());
  }
  if (static_cast<std::size_t>(K) > shortest) {
    throw ModelError("K = " + std::to_string(K) + " exceeds the shortest demonstration (" +
                     std::to_string(shortest) + " samples)");
  }
  if (total < 3 * static_cast<std::size_t>(K)) throw ModelError("need at least 3K samples in total");
}

}  // namespace

void HsmmModel::validate() const {
  if (K < 1) throw ModelError("model has no components");
  const auto k = static_cast<std::size_t>(K);
  if (trans.rows() != K || trans.cols() != K) throw ModelError("transition matrix has wrong shape");
  if (means.size() != k || covs.size() != k || dur_mean.size() != k || dur_var.size() != k) {
    throw ModelError("model parameter arrays disagree with K");
  }
  if (!(dt > 0.0)) throw ModelError("model dt must be positive");
  for (int i = 0; i < K; ++i) {
    double row = 0.0;
    for (int j = 0; j < K; ++j) {
      if (!(trans(i, j) >= 0.0)) throw ModelError("negative transition probability");
      row += trans(i, j);
    }
    if (std::fabs(row - 1.0) > 1e-9) throw ModelError("transition row " + std::to_string(i) + " does not sum to 1");
    if (!(dur_mean[i] >= 1.0)) throw ModelError("duration mean below one step");
    if (!(dur_var[i] > 0.0)) throw ModelError("duration variance must be positive");
    if (!means[i].allFinite()) throw ModelError("non-finite component mean");
    Eigen::LLT<Eigen::Matrix3d> llt(covs[i]);
    if (llt.info() != Eigen::Success) throw ModelError("covariance " + std::to_string(i) + " is not positive definite");
  }
}

double component_log_density(const HsmmModel& model, int j, const Pose& p) {
  return GaussianFactor(model.covs.at(j)).log_density(diff(to_vec(p), model.means.at(j)));
}

HsmmModel fit_hsmm(std::span<const Demonstration> demos, const FitOptions& opts, FitReport* report) {
  validate_demos(demos, opts.K);
  const int K = opts.K;
  const auto k_count = static_cast<std::size_t>(K);

  std::vector<Sample> samples;
  for (std::size_t d = 0; d < demos.size(); ++d) {
    for (std::size_t t = 0; t < demos[d].states.size(); ++t) {
      samples.push_back({to_vec(demos[d].states[t]), d, t});
    }
  }
  const std::size_t n_samples = samples.size();

  HsmmModel model;
  model.K = K;
  model.dt = demos.front().dt;
  model.means.resize(k_count);
  model.covs.resize(k_count);
  std::vector<double> priors(k_count);

  // Uniform time segmentation of every demo into K contiguous blocks.
  {
    std::vector<double> w(n_samples);
    for (int j = 0; j < K; ++j) {
      double count = 0.0;
      for (std::size_t n = 0; n < n_samples; ++n) {
        const std::size_t len = demos[samples[n].demo].states.size();
        const auto block = static_cast<int>(samples[n].t * k_count / len);
        w[n] = block == j ? 1.0 : 0.0;
        count += w[n];
      }
      Eigen::Matrix3d cov;
      weighted_gaussian(samples, w, circular_mean(samples, w), model.means[j], cov);
      model.covs[j] = regularize(cov);
      priors[j] = count / static_cast<double>(n_samples);
    }
  }
  if (opts.init_jitter > 0.0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> noise(0.0, opts.init_jitter);
    for (auto& m : model.means) {
      m(0) += noise(rng);
      m(1) += noise(rng);
      m(2) = wrap_angle(m(2) + noise(rng));
    }
  }

  FitReport local_report;
  FitReport& rep = report != nullptr ? *report : local_report;
  rep = FitReport{};

  Eigen::MatrixXd resp(n_samples, K);
  std::vector<double> logp(k_count);
  double prev_ll = kNegInf;
  for (int iter = 0;; ++iter) {
    // E-step.
    const auto factors = factorize(model);
    double ll = 0.0;
    for (std::size_t n = 0; n < n_samples; ++n) {
      for (int j = 0; j < K; ++j) {
        logp[j] = priors[j] > 0.0 ? std::log(priors[j]) + factors[j].log_density(diff(samples[n].x, model.means[j]))
                                  : kNegInf;
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      for (int j = 0; j < K; ++j) resp(n, j) = std::exp(logp[j] - lse);
    }
    if (!std::isfinite(ll)) throw ModelError("log-likelihood became non-finite during EM");
    rep.log_likelihood.push_back(ll);
    const bool converged = iter > 0 && (ll - prev_ll) / static_cast<double>(n_samples) < opts.tol;
    if (converged || iter >= opts.max_iters) {
      rep.iterations = iter;
      break;
    }
    prev_ll = ll;

    // M-step.
    std::vector<double> w(n_samples);
    for (int j = 0; j < K; ++j) {
      double nk = 0.0;
      for (std::size_t n = 0; n < n_samples; ++n) {
        w[n] = resp(n, j);
        nk += w[n];
      }
      priors[j] = nk / static_cast<double>(n_samples);
      if (nk < 1e-10) continue;  // collapsed component keeps its Gaussian
      Eigen::Matrix3d cov;
      weighted_gaussian(samples, w, model.means[j](2), model.means[j], cov);
      model.covs[j] = regularize(cov);
    }
  }

  // Hard labels from the final responsibilities.
  rep.labels.assign(demos.size(), {});
  for (std::size_t d = 0; d < demos.size(); ++d) rep.labels[d].resize(demos[d].states.size());
  std::vector<std::vector<double>> label_times(k_count);
  for (std::size_t n = 0; n < n_samples; ++n) {
    int best = 0;
    for (int j = 1; j < K; ++j) {
      if (resp(n, j) > resp(n, best)) best = j;
    }
    rep.labels[samples[n].demo][samples[n].t] = best;
    label_times[best].push_back(static_cast<double>(samples[n].t) * model.dt);
  }

  // Transitions count label changes only; durations are per-visit run lengths.
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(K, K);
  std::vector<std::vector<double>> runs(k_count);
  for (const auto& seq : rep.labels) {
    std::size_t start = 0;
    for (std::size_t t = 1; t <= seq.size(); ++t) {
      if (t == seq.size() || seq[t] != seq[start]) {
        runs[seq[start]].push_back(static_cast<double>(t - start));
        if (t < seq.size()) counts(seq[start], seq[t]) += 1.0;
        start = t;
      }
    }
  }
  model.trans = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    const double row = counts.row(i).sum();
    if (row > 0.0) {
      model.trans.row(i) = counts.row(i) / row;
    } else {
      model.trans(i, i) = 1.0;  // never left: absorbing
    }
  }
  double all_runs = 0.0;
  std::size_t n_runs = 0;
  for (const auto& r : runs) {
    for (double v : r) all_runs += v;
    n_runs += r.size();
  }
  const double fallback_duration = std::max(1.0, all_runs / static_cast<double>(std::max<std::size_t>(n_runs, 1)));
  model.dur_mean.assign(k_count, fallback_duration);
  model.dur_var.assign(k_count, kDurationVarFloor);
  for (int j = 0; j < K; ++j) {
    const auto& r = runs[j];
    if (r.empty()) continue;
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(r.size());
    model.dur_mean[j] = std::max(1.0, mean);
    model.dur_var[j] = std::max(kDurationVarFloor, var);
  }
  model.component_times.resize(k_count);
  for (int j = 0; j < K; ++j) model.component_times[j] = median(label_times[j]);

  model.validate();
  return model;
}

namespace {

/// Log-probabilities of durations 1..s_max under a truncated Gaussian.
std::vector<double> duration_log_probs(double mean, double var, int s_max) {
  std::vector<double> lp(static_cast<std::size_t>(s_max) + 1, kNegInf);
  for (int s = 1; s <= s_max; ++s) {
    const double d = s - mean;
    lp[s] = -0.5 * d * d / var;
  }
  const double z = log_sum_exp(std::span<const double>(lp).subspan(1));
  for (int s = 1; s <= s_max; ++s) lp[s] -= z;
  return lp;
}

StateSeq viterbi(const HsmmModel& model, const std::vector<std::vector<double>>& emit_cum, std::size_t T,
                 bool floor_transitions, bool unbounded_durations) {
  const int K = model.K;
  std::vector<int> s_max(K);
  std::vector<std::vector<double>> dur_lp(K);
  for (int j = 0; j < K; ++j) {
    s_max[j] = unbounded_durations ? static_cast<int>(T)
                                   : std::max(1, static_cast<int>(std::ceil(3.0 * model.dur_mean[j])));
    dur_lp[j] = duration_log_probs(model.dur_mean[j], model.dur_var[j], s_max[j]);
  }
  Eigen::MatrixXd log_a(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const double a = floor_transitions ? std::max(model.trans(i, j), 1e-12) : model.trans(i, j);
      log_a(i, j) = a > 0.0 ? std::log(a) : kNegInf;
    }
  }
  const double log_init = -std::log(static_cast<double>(K));

  // delta[t][j]: best score of x_0..x_{t-1} with a segment of j ending at t-1.
  std::vector<std::vector<double>> delta(T + 1, std::vector<double>(K, kNegInf));
  std::vector<std::vector<int>> back_d(T + 1, std::vector<int>(K, 0));
  std::vector<std::vector<int>> back_i(T + 1, std::vector<int>(K, -1));
  // entry[t][j]: best score of entering j at sample t, and from which state.
  std::vector<std::vector<double>> entry(T + 1, std::vector<double>(K, kNegInf));
  std::vector<std::vector<int>> entry_from(T + 1, std::vector<int>(K, -1));
  for (int j = 0; j < K; ++j) entry[0][j] = log_init;

  for (std::size_t t = 1; t <= T; ++t) {
    for (int j = 0; j < K; ++j) {
      const int dmax = std::min<int>(s_max[j], static_cast<int>(t));
      for (int d = 1; d <= dmax; ++d) {
        const std::size_t s = t - d;
        if (entry[s][j] == kNegInf) continue;
        const double score = entry[s][j] + dur_lp[j][d] + emit_cum[j][t] - emit_cum[j][s];
        if (score > delta[t][j]) {
          delta[t][j] = score;
          back_d[t][j] = d;
          back_i[t][j] = entry_from[s][j];
        }
      }
    }
    if (t == T) break;
    for (int j = 0; j < K; ++j) {
      for (int i = 0; i < K; ++i) {
        if (delta[t][i] == kNegInf || log_a(i, j) == kNegInf) continue;
        const double score = delta[t][i] + log_a(i, j);
        if (score > entry[t][j]) {
          entry[t][j] = score;
          entry_from[t][j] = i;
        }
      }
    }
  }

  int best = -1;
  for (int j = 0; j < K; ++j) {
    if (delta[T][j] > kNegInf && (best < 0 || delta[T][j] > delta[T][best])) best = j;
  }
  if (best < 0) return {};

  StateSeq labels(T);
  std::size_t t = T;
  int j = best;
  while (t > 0) {
    const int d = back_d[t][j];
    const int prev = back_i[t][j];
    for (std::size_t k = t - d; k < t; ++k) labels[k] = j;
    t -= d;
    j = prev;
  }
  return labels;
}

}  // namespace

StateSeq decode_states(const HsmmModel& model, const Demonstration& demo) {
  model.validate();
  if (std::fabs(model.dt - demo.dt) > 1e-9 * std::max(1.0, model.dt)) {
    throw ModelError("model and demonstration dt differ");
  }
  const std::size_t T = demo.states.size();
  if (T == 0) throw ModelError("empty demonstration");
  const auto factors = factorize(model);
  std::vector<std::vector<double>> emit_cum(model.K, std::vector<double>(T + 1, 0.0));
  for (int j = 0; j < model.K; ++j) {
    for (std::size_t t = 0; t < T; ++t) {
      emit_cum[j][t + 1] = emit_cum[j][t] + factors[j].log_density(diff(to_vec(demo.states[t]), model.means[j]));
    }
  }
  StateSeq labels = viterbi(model, emit_cum, T, false, false);
  // Zero transitions or the 3x duration cap can make a long demo undecodable;
  // relax both rather than fail.
  if (labels.empty()) labels = viterbi(model, emit_cum, T, true, true);
  return labels;
}

std::vector<Segment> component_sequence(const HsmmModel& model, const Pose& start, int horizon_steps) {
  if (horizon_steps < 1) throw ModelError("horizon must be at least one step");
  const auto factors = factorize(model);
  const Eigen::Vector3d s = to_vec(start);
  int current = 0;
  double best = kNegInf;
  for (int j = 0; j < model.K; ++j) {
    const double lp = factors[j].log_density(diff(s, model.means[j]));
    if (lp > best) {
      best = lp;
      current = j;
    }
  }

  std::vector<Segment> plan;
  int remaining = horizon_steps;
  while (remaining > 0) {
    const int stay = std::max(1, static_cast<int>(std::lround(model.dur_mean[current])));
    int next = -1;
    double mass = 0.0;
    for (int m = 0; m < model.K; ++m) {
      if (m != current && model.trans(current, m) > mass) {
        mass = model.trans(current, m);
        next = m;
      }
    }
    if (next < 0 || mass < 1e-6) {
      plan.push_back({current, remaining});
      break;
    }
    const int steps = std::min(stay, remaining);
    plan.push_back({current, steps});
    remaining -= steps;
    current = next;
  }
  return plan;
}

}  // namespace stlplan::lfd
