#include "stlplan/stl/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "stlplan/error.hpp"

namespace stlplan::stl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_index(std::size_t t, std::size_t length) {
  if (t >= length) {
    throw ModelError("time index " + std::to_string(t) + " outside trace of length " + std::to_string(length));
  }
}

/// Atom with its channels resolved against one trace.
class ResolvedAtom {
 public:
  ResolvedAtom(const Atom& a, const Trace& trace) {
    if (const auto* cmp = std::get_if<CmpAtom>(&a)) {
      is_box_ = false;
      less_ = cmp->op == CmpOp::kLess;
      bound_ = cmp->bound;
      constant_ = cmp->expr.constant;
      for (const auto& term : cmp->expr.terms) {
        terms_.push_back({term.coef, trace.channel(term.channel)});
      }
      return;
    }
    const auto& box = std::get<BoxAtom>(a);
    is_box_ = true;
    x_ = trace.channel(box.x_chan);
    y_ = trace.channel(box.y_chan);
    bounds_[0] = resolve(box.x_lb, trace);
    bounds_[1] = resolve(box.x_ub, trace);
    bounds_[2] = resolve(box.y_lb, trace);
    bounds_[3] = resolve(box.y_ub, trace);
  }

  double margin(std::size_t t) const {
    if (!is_box_) {
      double e = constant_;
      for (const auto& term : terms_) e += term.coef * term.values[t];
      return less_ ? bound_ - e : e - bound_;
    }
    const double x = x_[t];
    const double y = y_[t];
    return std::min({x - bounds_[0].at(t), bounds_[1].at(t) - x, y - bounds_[2].at(t), bounds_[3].at(t) - y});
  }

 private:
  struct Term {
    double coef;
    std::span<const double> values;
  };
  struct Bound {
    double constant = 0.0;
    std::span<const double> values;
    bool is_channel = false;
    double at(std::size_t t) const { return is_channel ? values[t] : constant; }
  };

  static Bound resolve(const BoundSource& b, const Trace& trace) {
    Bound out;
    if (const auto* name = std::get_if<std::string>(&b)) {
      out.is_channel = true;
      out.values = trace.channel(*name);
    } else {
      out.constant = std::get<double>(b);
    }
    return out;
  }

  bool is_box_ = false;
  bool less_ = false;
  double bound_ = 0.0;
  double constant_ = 0.0;
  std::vector<Term> terms_;
  std::span<const double> x_;
  std::span<const double> y_;
  Bound bounds_[4];
};

/// Per-node, per-sample cache shared by the recursive evaluators below.
template <typename Value>
class Memo {
 public:
  explicit Memo(std::size_t length) : length_(length) {}

  Value* find(const Node* n, std::size_t t) {
    auto it = slots_.find(n);
    if (it == slots_.end()) return nullptr;
    return it->second.done[t] ? &it->second.values[t] : nullptr;
  }
  void store(const Node* n, std::size_t t, Value v) {
    auto& slot = slots_[n];
    if (slot.values.empty()) {
      slot.values.resize(length_);
      slot.done.assign(length_, 0);
    }
    slot.values[t] = v;
    slot.done[t] = 1;
  }

 private:
  struct Slot {
    std::vector<Value> values;
    std::vector<std::uint8_t> done;
  };
  std::size_t length_;
  std::unordered_map<const Node*, Slot> slots_;
};

class AtomCache {
 public:
  explicit AtomCache(const Trace& trace) : trace_(trace) {}

  const ResolvedAtom& get(const Node* n) {
    auto it = atoms_.find(n);
    if (it == atoms_.end()) it = atoms_.emplace(n, ResolvedAtom(n->atom, trace_)).first;
    return it->second;
  }

 private:
  const Trace& trace_;
  std::unordered_map<const Node*, ResolvedAtom> atoms_;
};

class BoolEvaluator {
 public:
  explicit BoolEvaluator(const Trace& trace) : trace_(trace), atoms_(trace), memo_(trace.length()) {}

  bool eval(const Node* n, std::size_t t) {
    if (auto* hit = memo_.find(n, t)) return *hit != 0;
    bool v = false;
    switch (n->op) {
      case Op::kAtom:
        v = atoms_.get(n).margin(t) > 0.0;
        break;
      case Op::kNot:
        v = !eval(n->lhs.get(), t);
        break;
      case Op::kAnd:
        v = eval(n->lhs.get(), t) && eval(n->rhs.get(), t);
        break;
      case Op::kOr:
        v = eval(n->lhs.get(), t) || eval(n->rhs.get(), t);
        break;
      case Op::kEventually: {
        const auto w = interval_to_indices(n->window, t, trace_);
        for (std::size_t k = w.first; k <= w.last && !v; ++k) v = eval(n->lhs.get(), k);
        break;
      }
      case Op::kGlobally: {
        const auto w = interval_to_indices(n->window, t, trace_);
        v = true;
        for (std::size_t k = w.first; k <= w.last && v; ++k) v = eval(n->lhs.get(), k);
        break;
      }
      case Op::kUntil: {
        const auto w = interval_to_indices(n->window, t, trace_);
        for (std::size_t k = w.first; k <= w.last && !v; ++k) {
          if (!eval(n->rhs.get(), k)) continue;
          bool prefix = true;
          for (std::size_t j = t; j < k && prefix; ++j) prefix = eval(n->lhs.get(), j);
          v = prefix;
        }
        break;
      }
    }
    memo_.store(n, t, v ? 1 : 0);
    return v;
  }

 private:
  const Trace& trace_;
  AtomCache atoms_;
  Memo<std::uint8_t> memo_;
};

class ClassicalEvaluator {
 public:
  explicit ClassicalEvaluator(const Trace& trace) : trace_(trace), atoms_(trace), memo_(trace.length()) {}

  double eval(const Node* n, std::size_t t) {
    if (auto* hit = memo_.find(n, t)) return *hit;
    double v = 0.0;
    switch (n->op) {
      case Op::kAtom:
        v = atoms_.get(n).margin(t);
        break;
      case Op::kNot:
        v = -eval(n->lhs.get(), t);
        break;
      case Op::kAnd:
        v = std::min(eval(n->lhs.get(), t), eval(n->rhs.get(), t));
        break;
      case Op::kOr:
        v = std::max(eval(n->lhs.get(), t), eval(n->rhs.get(), t));
        break;
      case Op::kEventually: {
        const auto w = interval_to_indices(n->window, t, trace_);
        v = -kInf;
        for (std::size_t k = w.first; k <= w.last; ++k) v = std::max(v, eval(n->lhs.get(), k));
        break;
      }
      case Op::kGlobally: {
        const auto w = interval_to_indices(n->window, t, trace_);
        v = kInf;
        for (std::size_t k = w.first; k <= w.last; ++k) v = std::min(v, eval(n->lhs.get(), k));
        break;
      }
      case Op::kUntil: {
        const auto w = interval_to_indices(n->window, t, trace_);
        double prefix = kInf;  // min of lhs over [t, k-1]; +inf when empty
        for (std::size_t j = t; j < w.first; ++j) prefix = std::min(prefix, eval(n->lhs.get(), j));
        v = -kInf;
        for (std::size_t k = w.first; k <= w.last; ++k) {
          v = std::max(v, std::min(eval(n->rhs.get(), k), prefix));
          prefix = std::min(prefix, eval(n->lhs.get(), k));
        }
        break;
      }
    }
    memo_.store(n, t, v);
    return v;
  }

 private:
  const Trace& trace_;
  AtomCache atoms_;
  Memo<double> memo_;
};

void flatten(const Node* n, Op op, std::vector<const Node*>& out) {
  if (n->op == op) {
    flatten(n->lhs.get(), op, out);
    flatten(n->rhs.get(), op, out);
  } else {
    out.push_back(n);
  }
}

class SmoothEvaluator {
 public:
  SmoothEvaluator(const Trace& trace, double nu)
      : trace_(trace), nu_(nu), atoms_(trace), memo_(trace.length()) {}

  double eval(const Node* n, std::size_t t) {
    if (auto* hit = memo_.find(n, t)) return *hit;
    double v = 0.0;
    switch (n->op) {
      case Op::kAtom:
        v = atoms_.get(n).margin(t);
        break;
      case Op::kNot:
        v = -eval(n->lhs.get(), t);
        break;
      case Op::kAnd:
      case Op::kOr: {
        std::vector<const Node*> operands;
        flatten(n, n->op, operands);
        std::vector<double> values;
        values.reserve(operands.size());
        for (const Node* c : operands) values.push_back(eval(c, t));
        v = n->op == Op::kAnd ? smooth_and(values, nu_) : smooth_or(values, nu_);
        break;
      }
      case Op::kEventually:
      case Op::kGlobally: {
        const auto w = interval_to_indices(n->window, t, trace_);
        std::vector<double> values;
        values.reserve(w.size());
        for (std::size_t k = w.first; k <= w.last; ++k) values.push_back(eval(n->lhs.get(), k));
        v = n->op == Op::kGlobally ? smooth_and(values, nu_) : smooth_or(values, nu_);
        break;
      }
      case Op::kUntil: {
        const auto w = interval_to_indices(n->window, t, trace_);
        std::vector<double> prefix;
        for (std::size_t j = t; j < w.first; ++j) prefix.push_back(eval(n->lhs.get(), j));
        std::vector<double> witnesses;
        witnesses.reserve(w.size());
        std::vector<double> operands;
        for (std::size_t k = w.first; k <= w.last; ++k) {
          operands.assign(prefix.begin(), prefix.end());
          operands.push_back(eval(n->rhs.get(), k));
          witnesses.push_back(smooth_and(operands, nu_));
          prefix.push_back(eval(n->lhs.get(), k));
        }
        v = smooth_or(witnesses, nu_);
        break;
      }
    }
    memo_.store(n, t, v);
    return v;
  }

 private:
  const Trace& trace_;
  double nu_;
  AtomCache atoms_;
  Memo<double> memo_;
};

}  // namespace

IndexRange interval_to_indices(const Interval& iv, std::size_t t, std::size_t length, double dt) {
  check_index(t, length);
  const double lo = iv.lo() / dt;
  const double hi = iv.hi() / dt;
  const double lo_steps = std::ceil(lo - 1e-9 * std::max(1.0, std::fabs(lo)));
  const double hi_steps = std::floor(hi + 1e-9 * std::max(1.0, std::fabs(hi)));
  const double first = static_cast<double>(t) + lo_steps;
  const double last = std::min(static_cast<double>(t) + hi_steps, static_cast<double>(length - 1));
  if (first > static_cast<double>(length - 1) || first > last) {
    throw EmptyWindowError("window [" + std::to_string(iv.lo()) + ", " + std::to_string(iv.hi()) +
                           "] at index " + std::to_string(t) + " selects no sample of a trace of length " +
                           std::to_string(length));
  }
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

IndexRange interval_to_indices(const Interval& iv, std::size_t t, const Trace& trace) {
  return interval_to_indices(iv, t, trace.length(), trace.dt());
}

double eval_atom(const Atom& a, const Trace& trace, std::size_t t) {
  check_index(t, trace.length());
  return ResolvedAtom(a, trace).margin(t);
}

bool eval_bool(const Formula& f, const Trace& trace, std::size_t t) {
  check_index(t, trace.length());
  return BoolEvaluator(trace).eval(f.node(), t);
}

double robustness(const Formula& f, const Trace& trace, std::size_t t) {
  check_index(t, trace.length());
  return ClassicalEvaluator(trace).eval(f.node(), t);
}

double smooth_and(std::span<const double> values, double nu) {
  if (!(nu > 0.0)) throw ModelError("smooth robustness requires nu > 0");
  if (values.empty()) throw ModelError("smooth conjunction of zero operands");
  const double r_min = *std::min_element(values.begin(), values.end());
  if (r_min == 0.0) return 0.0;
  if (values.size() == 1) return r_min;

  // r~_i >= 0 when r_min > 0 and r~_i <= 0 when r_min < 0, so every exponent below is
  // <= 0 with its maximum at the minimizer. The max shift keeps that true under rounding.
  std::vector<double> rt(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rt[i] = (values[i] - r_min) / r_min;

  double num = 0.0;
  double den = 0.0;
  if (r_min > 0.0) {
    double shift = -kInf;
    for (double r : rt) shift = std::max(shift, -nu * r);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double w = std::exp(-nu * rt[i] - shift);
      num += values[i] * w;
      den += w;
    }
  } else {
    double shift_num = -kInf;
    double shift_den = -kInf;
    for (double r : rt) {
      shift_num = std::max(shift_num, (1.0 + nu) * r);
      shift_den = std::max(shift_den, nu * r);
    }
    for (double r : rt) {
      num += std::exp((1.0 + nu) * r - shift_num);
      den += std::exp(nu * r - shift_den);
    }
    return r_min * (num / den) * std::exp(shift_num - shift_den);
  }
  return num / den;
}

double smooth_or(std::span<const double> values, double nu) {
  std::vector<double> neg(values.size());
  std::transform(values.begin(), values.end(), neg.begin(), [](double v) { return -v; });
  return -smooth_and(neg, nu);
}

double smooth_robustness(const Formula& f, const Trace& trace, std::size_t t, double nu) {
  if (!(nu > 0.0)) throw ModelError("smooth robustness requires nu > 0");
  check_index(t, trace.length());
  return SmoothEvaluator(trace, nu).eval(f.node(), t);
}

double evaluate(const Formula& f, const Trace& trace, std::size_t t, const RobustnessConfig& cfg) {
  return cfg.semantics == Semantics::kClassical ? robustness(f, trace, t)
                                                : smooth_robustness(f, trace, t, cfg.nu);
}

}  // namespace stlplan::stl
