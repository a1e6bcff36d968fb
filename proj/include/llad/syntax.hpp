#pragma once

#include <string>

#include "llad/term.hpp"

namespace llad {

// Surface grammar:
//   M ::= lam p . M | let p = N in M | (M N) | () | (M, N) | <M, N> | <>
//       | !M | float | sin|cos|exp|neg|add|sub|mul | dot+ | dot*  | ident
//   p ::= x : T | !x : T | () | (p, q) | <p, q>
//   T ::= R | 1 | Top | T -o T | T * T | T & T | !T | (T)
// `let p = N in M` parses as ((lam p . M) N).

std::string print_type(const TypePtr& t);
std::string print_pattern(const PatternPtr& p);
std::string print_term(const TermPtr& t);

TypePtr parse_type(const std::string& src);
TermPtr parse_term(const std::string& src);

}  // namespace llad
