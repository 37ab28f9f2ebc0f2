#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace stlplan::stl {

/// Closed time window [lo, hi] in seconds, relative to the evaluation time.
class Interval {
 public:
  /// Throws ModelError unless 0 <= lo <= hi and both are finite.
  Interval(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
};

struct LinTerm {
  double coef = 1.0;
  std::string channel;

  friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

/// sum_i coef_i * channel_i + constant. Channel names are unique per expression.
struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  friend bool operator==(const LinExpr&, const LinExpr&) = default;
};

enum class CmpOp { kLess, kGreater };

/// `expr < bound` has margin bound - expr; `expr > bound` has margin expr - bound.
struct CmpAtom {
  LinExpr expr;
  CmpOp op = CmpOp::kGreater;
  double bound = 0.0;

  friend bool operator==(const CmpAtom&, const CmpAtom&) = default;
};

/// A box bound is either a constant or a channel read at the evaluation index.
using BoundSource = std::variant<double, std::string>;

/// (x, y) inside [x_lb, x_ub] x [y_lb, y_ub]; margin is the smallest of the four slacks.
struct BoxAtom {
  std::string x_chan;
  std::string y_chan;
  BoundSource x_lb;
  BoundSource x_ub;
  BoundSource y_lb;
  BoundSource y_ub;

  friend bool operator==(const BoxAtom&, const BoxAtom&) = default;
};

using Atom = std::variant<CmpAtom, BoxAtom>;

enum class Op { kAtom, kNot, kAnd, kOr, kEventually, kGlobally, kUntil };

class Formula;

struct Node {
  Op op = Op::kAtom;
  Atom atom;                       // kAtom only
  Interval window{0.0, 0.0};       // temporal operators only
  std::shared_ptr<const Node> lhs;  // sole child of unary operators
  std::shared_ptr<const Node> rhs;
};

/// Immutable STL formula. Copies share structure.
class Formula {
 public:
  static Formula atom(Atom a);
  static Formula negate(const Formula& f);
  static Formula conj(const Formula& a, const Formula& b);
  static Formula disj(const Formula& a, const Formula& b);
  static Formula eventually(Interval iv, const Formula& f);
  static Formula globally(Interval iv, const Formula& f);
  static Formula until(Interval iv, const Formula& lhs, const Formula& rhs);

  /// Left-nested conjunction of all operands; empty input yields the neutral "true" atom.
  static Formula conj_all(const std::vector<Formula>& operands);
  /// Constant-margin atom that is always satisfied with margin `margin`.
  static Formula always_true(double margin = 1e6);

  Op op() const noexcept { return node_->op; }
  const Atom& atom_value() const { return node_->atom; }
  const Interval& window() const { return node_->window; }
  Formula child() const { return Formula(node_->lhs); }
  Formula left() const { return Formula(node_->lhs); }
  Formula right() const { return Formula(node_->rhs); }

  const Node* node() const noexcept { return node_.get(); }

  /// Channel names referenced by any atom, sorted and de-duplicated.
  std::vector<std::string> channels() const;

  /// Structural equality (exact on numeric literals).
  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

}  // namespace stlplan::stl
