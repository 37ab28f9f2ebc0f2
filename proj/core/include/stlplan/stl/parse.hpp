#pragma once

#include <string>
#include <string_view>

#include "stlplan/stl/formula.hpp"

namespace stlplan::stl {

/// Parses spec-source text. Throws ParseError with line/column on malformed input.
///
/// Grammar (whitespace insignificant, `#` starts a comment to end of line):
///
///     formula  := until
///     until    := or ( 'U' interval or )*
///     or       := and ( '|' and )*
///     and      := unary ( '&' unary )*
///     unary    := '!' unary | 'G' interval unary | 'F' interval unary | primary
///     primary  := '(' formula ')' | atom
///     interval := '[' number ',' number ']'
///     atom     := linexpr ('<'|'>') number
///               | 'in_box' '(' chan ',' chan ',' bound ',' bound ',' bound ',' bound ')'
///     linexpr  := ['-'] term (('+'|'-') term)*
///     term     := number '*' chan | chan | number
///     bound    := number | chan
Formula parse_formula(std::string_view text);

/// Renders a formula so that parse_formula(format_formula(f)) == f.
std::string format_formula(const Formula& f);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace stlplan::stl
