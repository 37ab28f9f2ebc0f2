#include "stlplan/stl/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "stlplan/error.hpp"

namespace stlplan::stl {

namespace {

enum class Tok {
  kIdent,
  kNumber,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kBang,
  kAmp,
  kPipe,
  kLess,
  kGreater,
  kPlus,
  kMinus,
  kStar,
  kEnd
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      tok.kind = Tok::kIdent;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      const std::string_view text = src.substr(i, j - i);
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("malformed number '" + std::string(text) + "'", line, col);
      }
      tok.kind = Tok::kNumber;
      tok.text = std::string(text);
      tok.number = value;
      advance(j - i);
      out.push_back(std::move(tok));
      continue;
    }
    switch (c) {
      case '(': tok.kind = Tok::kLParen; break;
      case ')': tok.kind = Tok::kRParen; break;
      case '[': tok.kind = Tok::kLBracket; break;
      case ']': tok.kind = Tok::kRBracket; break;
      case ',': tok.kind = Tok::kComma; break;
      case '!': tok.kind = Tok::kBang; break;
      case '&': tok.kind = Tok::kAmp; break;
      case '|': tok.kind = Tok::kPipe; break;
      case '<': tok.kind = Tok::kLess; break;
      case '>': tok.kind = Tok::kGreater; break;
      case '+': tok.kind = Tok::kPlus; break;
      case '-': tok.kind = Tok::kMinus; break;
      case '*': tok.kind = Tok::kStar; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    tok.text = std::string(1, c);
    advance(1);
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse() {
    Formula f = parse_until();
    if (peek().kind != Tok::kEnd) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().column);
  }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      fail(std::string("expected ") + what + (peek().kind == Tok::kEnd ? " at end of input"
                                                                          : ", found '" + peek().text + "'"));
    }
    take();
  }
  bool is_keyword(const char* word, Tok next) const {
    return peek().kind == Tok::kIdent && peek().text == word && peek(1).kind == next;
  }

  Formula parse_until() {
    Formula lhs = parse_or();
    while (is_keyword("U", Tok::kLBracket)) {
      take();
      Interval iv = parse_interval();
      Formula rhs = parse_or();
      lhs = Formula::until(iv, lhs, rhs);
    }
    return lhs;
  }

  Formula parse_or() {
    Formula lhs = parse_and();
    while (peek().kind == Tok::kPipe) {
      take();
      lhs = Formula::disj(lhs, parse_and());
    }
    return lhs;
  }

  Formula parse_and() {
    Formula lhs = parse_unary();
    while (peek().kind == Tok::kAmp) {
      take();
      lhs = Formula::conj(lhs, parse_unary());
    }
    return lhs;
  }

  Formula parse_unary() {
    if (peek().kind == Tok::kBang) {
      take();
      return Formula::negate(parse_unary());
    }
    if (is_keyword("G", Tok::kLBracket)) {
      take();
      Interval iv = parse_interval();
      return Formula::globally(iv, parse_unary());
    }
    if (is_keyword("F", Tok::kLBracket)) {
      take();
      Interval iv = parse_interval();
      return Formula::eventually(iv, parse_unary());
    }
    return parse_primary();
  }

  Formula parse_primary() {
    if (peek().kind == Tok::kLParen) {
      take();
      Formula f = parse_until();
      expect(Tok::kRParen, "')'");
      return f;
    }
    return parse_atom();
  }

  double parse_signed_number(const char* what) {
    bool negative = false;
    if (peek().kind == Tok::kMinus) {
      take();
      negative = true;
    } else if (peek().kind == Tok::kPlus) {
      take();
    }
    if (peek().kind != Tok::kNumber) fail(std::string("expected ") + what);
    const double v = take().number;
    return negative ? -v : v;
  }

  Interval parse_interval() {
    const Token open = peek();
    expect(Tok::kLBracket, "'['");
    const double lo = parse_signed_number("interval lower bound");
    expect(Tok::kComma, "','");
    const double hi = parse_signed_number("interval upper bound");
    expect(Tok::kRBracket, "']'");
    if (lo < 0.0) throw ParseError("malformed interval: negative lower bound", open.line, open.column);
    if (lo > hi) throw ParseError("malformed interval: lower bound exceeds upper bound", open.line, open.column);
    return Interval(lo, hi);
  }

  std::string parse_channel() {
    if (peek().kind != Tok::kIdent) fail("expected channel name");
    return take().text;
  }

  BoundSource parse_bound() {
    if (peek().kind == Tok::kIdent) return take().text;
    return parse_signed_number("number or channel name");
  }

  Formula parse_atom() {
    const Token start = peek();
    if (start.kind == Tok::kIdent && peek(1).kind == Tok::kLParen) {
      if (start.text != "in_box") fail("unknown function '" + start.text + "'");
      take();
      take();
      BoxAtom box;
      box.x_chan = parse_channel();
      expect(Tok::kComma, "','");
      box.y_chan = parse_channel();
      expect(Tok::kComma, "','");
      box.x_lb = parse_bound();
      expect(Tok::kComma, "','");
      box.x_ub = parse_bound();
      expect(Tok::kComma, "','");
      box.y_lb = parse_bound();
      expect(Tok::kComma, "','");
      box.y_ub = parse_bound();
      expect(Tok::kRParen, "')'");
      try {
        return Formula::atom(std::move(box));
      } catch (const ModelError& e) {
        throw ParseError(e.what(), start.line, start.column);
      }
    }

    CmpAtom cmp;
    cmp.expr = parse_linexpr();
    if (peek().kind == Tok::kLess || peek().kind == Tok::kGreater) {
      cmp.op = take().kind == Tok::kLess ? CmpOp::kLess : CmpOp::kGreater;
      cmp.bound = parse_signed_number("comparison bound");
    } else {
      // A bare expression `e` abbreviates `e > 0`.
      cmp.op = CmpOp::kGreater;
      cmp.bound = 0.0;
    }
    return Formula::atom(std::move(cmp));
  }

  LinExpr parse_linexpr() {
    LinExpr expr;
    std::set<std::string> seen;
    double sign = 1.0;
    if (peek().kind == Tok::kMinus) {
      take();
      sign = -1.0;
    } else if (peek().kind == Tok::kPlus) {
      take();
    }
    for (;;) {
      const Token t = peek();
      if (t.kind == Tok::kNumber) {
        take();
        if (peek().kind == Tok::kStar) {
          take();
          const Token ch = peek();
          std::string name = parse_channel();
          if (!seen.insert(name).second) {
            throw ParseError("channel '" + name + "' repeated in one expression", ch.line, ch.column);
          }
          expr.terms.push_back({sign * t.number, std::move(name)});
        } else {
          expr.constant += sign * t.number;
        }
      } else if (t.kind == Tok::kIdent) {
        if (peek(1).kind == Tok::kLParen) fail("unknown function '" + t.text + "'");
        take();
        if (!seen.insert(t.text).second) {
          throw ParseError("channel '" + t.text + "' repeated in one expression", t.line, t.column);
        }
        expr.terms.push_back({sign, t.text});
      } else {
        fail(t.kind == Tok::kEnd ? "unexpected end of input, expected an atom"
                                 : "unexpected '" + t.text + "', expected an atom");
      }
      if (peek().kind == Tok::kPlus) {
        take();
        sign = 1.0;
      } else if (peek().kind == Tok::kMinus) {
        take();
        sign = -1.0;
      } else {
        break;
      }
    }
    return expr;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string format_bound(const BoundSource& b) {
  if (const auto* name = std::get_if<std::string>(&b)) return *name;
  return format_number(std::get<double>(b));
}

std::string format_linexpr(const LinExpr& e) {
  std::string out;
  bool first = true;
  for (const auto& term : e.terms) {
    const bool negative = std::signbit(term.coef);
    const double mag = std::fabs(term.coef);
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (mag != 1.0) out += format_number(mag) + "*";
    out += term.channel;
    first = false;
  }
  if (first) return format_number(e.constant);
  if (e.constant != 0.0) {
    out += e.constant < 0.0 ? " - " : " + ";
    out += format_number(std::fabs(e.constant));
  }
  return out;
}

std::string format_atom(const Atom& a) {
  if (const auto* cmp = std::get_if<CmpAtom>(&a)) {
    return format_linexpr(cmp->expr) + (cmp->op == CmpOp::kLess ? " < " : " > ") + format_number(cmp->bound);
  }
  const auto& box = std::get<BoxAtom>(a);
  return "in_box(" + box.x_chan + ", " + box.y_chan + ", " + format_bound(box.x_lb) + ", " +
         format_bound(box.x_ub) + ", " + format_bound(box.y_lb) + ", " + format_bound(box.y_ub) + ")";
}

std::string format_interval(const Interval& iv) {
  return "[" + format_number(iv.lo()) + "," + format_number(iv.hi()) + "]";
}

std::string format_node(const Formula& f);

// Operand of a binary operator: atoms stay bare, everything else is parenthesized.
std::string format_operand(const Formula& f) {
  if (f.op() == Op::kAtom) return format_atom(f.atom_value());
  return "(" + format_node(f) + ")";
}

std::string format_node(const Formula& f) {
  switch (f.op()) {
    case Op::kAtom:
      return format_atom(f.atom_value());
    case Op::kNot: {
      const Formula c = f.child();
      const bool bare = (c.op() == Op::kAtom && std::holds_alternative<BoxAtom>(c.atom_value())) ||
                        c.op() == Op::kNot || c.op() == Op::kGlobally || c.op() == Op::kEventually;
      return "!" + (bare ? format_node(c) : "(" + format_node(c) + ")");
    }
    case Op::kAnd:
      return format_operand(f.left()) + " & " + format_operand(f.right());
    case Op::kOr:
      return format_operand(f.left()) + " | " + format_operand(f.right());
    case Op::kEventually:
      return "F" + format_interval(f.window()) + "(" + format_node(f.child()) + ")";
    case Op::kGlobally:
      return "G" + format_interval(f.window()) + "(" + format_node(f.child()) + ")";
    case Op::kUntil:
      return format_operand(f.left()) + " U" + format_interval(f.window()) + " " + format_operand(f.right());
  }
  return {};
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ModelError("cannot format number");
  return std::string(buf, ptr);
}

Formula parse_formula(std::string_view text) {
  Parser p(tokenize(text));
  return p.parse();
}

std::string format_formula(const Formula& f) { return format_node(f); }

}  // namespace stlplan::stl
