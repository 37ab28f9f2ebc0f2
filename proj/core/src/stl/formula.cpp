#include "stlplan/stl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stlplan/error.hpp"

namespace stlplan::stl {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ModelError("interval bounds must be finite");
  }
  if (lo < 0.0) throw ModelError("interval lower bound must be non-negative");
  if (lo > hi) throw ModelError("malformed interval: lower bound exceeds upper bound");
}

namespace {

std::shared_ptr<Node> make(Op op) {
  auto n = std::make_shared<Node>();
  n->op = op;
  return n;
}

bool equal_nodes(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a == nullptr || b == nullptr) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::kAtom:
      return a->atom == b->atom;
    case Op::kNot:
      return equal_nodes(a->lhs.get(), b->lhs.get());
    case Op::kAnd:
    case Op::kOr:
      return equal_nodes(a->lhs.get(), b->lhs.get()) && equal_nodes(a->rhs.get(), b->rhs.get());
    case Op::kEventually:
    case Op::kGlobally:
      return a->window == b->window && equal_nodes(a->lhs.get(), b->lhs.get());
    case Op::kUntil:
      return a->window == b->window && equal_nodes(a->lhs.get(), b->lhs.get()) &&
             equal_nodes(a->rhs.get(), b->rhs.get());
  }
  return false;
}

void collect_channels(const Node* n, std::set<std::string>& out) {
  if (n == nullptr) return;
  if (n->op == Op::kAtom) {
    if (const auto* cmp = std::get_if<CmpAtom>(&n->atom)) {
      for (const auto& term : cmp->expr.terms) out.insert(term.channel);
    } else {
      const auto& box = std::get<BoxAtom>(n->atom);
      out.insert(box.x_chan);
      out.insert(box.y_chan);
      for (const auto* b : {&box.x_lb, &box.x_ub, &box.y_lb, &box.y_ub}) {
        if (const auto* name = std::get_if<std::string>(b)) out.insert(*name);
      }
    }
    return;
  }
  collect_channels(n->lhs.get(), out);
  collect_channels(n->rhs.get(), out);
}

void validate_atom(const Atom& a) {
  if (const auto* cmp = std::get_if<CmpAtom>(&a)) {
    std::set<std::string> seen;
    for (const auto& term : cmp->expr.terms) {
      if (term.channel.empty()) throw ModelError("empty channel name in expression");
      if (!seen.insert(term.channel).second) {
        throw ModelError("channel '" + term.channel + "' repeated in one expression");
      }
    }
    return;
  }
  const auto& box = std::get<BoxAtom>(a);
  if (box.x_chan.empty() || box.y_chan.empty()) throw ModelError("empty channel name in in_box");
  const auto* xl = std::get_if<double>(&box.x_lb);
  const auto* xu = std::get_if<double>(&box.x_ub);
  const auto* yl = std::get_if<double>(&box.y_lb);
  const auto* yu = std::get_if<double>(&box.y_ub);
  if (xl && xu && !(*xl < *xu)) throw ModelError("in_box requires x_lb < x_ub");
  if (yl && yu && !(*yl < *yu)) throw ModelError("in_box requires y_lb < y_ub");
}

}  // namespace

Formula Formula::atom(Atom a) {
  validate_atom(a);
  auto n = make(Op::kAtom);
  n->atom = std::move(a);
  return Formula(std::move(n));
}

Formula Formula::negate(const Formula& f) {
  auto n = make(Op::kNot);
  n->lhs = f.node_;
  return Formula(std::move(n));
}

Formula Formula::conj(const Formula& a, const Formula& b) {
  auto n = make(Op::kAnd);
  n->lhs = a.node_;
  n->rhs = b.node_;
  return Formula(std::move(n));
}

Formula Formula::disj(const Formula& a, const Formula& b) {
  auto n = make(Op::kOr);
  n->lhs = a.node_;
  n->rhs = b.node_;
  return Formula(std::move(n));
}

Formula Formula::eventually(Interval iv, const Formula& f) {
  auto n = make(Op::kEventually);
  n->window = iv;
  n->lhs = f.node_;
  return Formula(std::move(n));
}

Formula Formula::globally(Interval iv, const Formula& f) {
  auto n = make(Op::kGlobally);
  n->window = iv;
  n->lhs = f.node_;
  return Formula(std::move(n));
}

Formula Formula::until(Interval iv, const Formula& lhs, const Formula& rhs) {
  auto n = make(Op::kUntil);
  n->window = iv;
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  return Formula(std::move(n));
}

Formula Formula::conj_all(const std::vector<Formula>& operands) {
  if (operands.empty()) return always_true();
  Formula acc = operands.front();
  for (std::size_t i = 1; i < operands.size(); ++i) acc = conj(acc, operands[i]);
  return acc;
}

Formula Formula::always_true(double margin) {
  CmpAtom a;
  a.expr.constant = margin;
  a.op = CmpOp::kGreater;
  a.bound = 0.0;
  return atom(std::move(a));
}

std::vector<std::string> Formula::channels() const {
  std::set<std::string> out;
  collect_channels(node_.get(), out);
  return {out.begin(), out.end()};
}

bool operator==(const Formula& a, const Formula& b) {
  return equal_nodes(a.node_.get(), b.node_.get());
}

}  // namespace stlplan::stl
