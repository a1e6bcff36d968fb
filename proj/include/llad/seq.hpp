#pragma once

#include <vector>

#include "llad/term.hpp"

namespace llad {

// n-ary additive tuples are right-nested; the empty tuple is <> / Top and a
// singleton is the element itself.
TypePtr with_seq_type(const std::vector<TypePtr>& types);
TermPtr nary_with_term(const std::vector<TermPtr>& terms);
// Pattern of fresh variables shaped like the given types (a single fresh
// Top-typed variable for the empty tuple).
PatternPtr nary_with_pattern(const std::vector<std::pair<std::string, TypePtr>>& vars,
                             FreshSupply& supply);
// Fully right-nested pattern of fresh variables over an arbitrary &-sequence type.
PatternPtr fresh_with_pattern(const TypePtr& h, FreshSupply& supply);
// The tuple term reading a pattern back as a term (variables at the leaves).
TermPtr pattern_as_term(const PatternPtr& p);

// Splitting and fusion terms over &-tuples, indexed by a set of positions.
//   split: &A_i -o (&_{i in I} A_i) & (&_{i notin I} A_i)
//   fuse:  (&_{i in I} A_i) & (&_{i notin I} A_i) -o &A_i
// Both are applied with identity instances elided.
TermPtr split_term(const std::vector<TypePtr>& types, const std::vector<int>& idx, FreshSupply& s);
TermPtr fuse_term(const std::vector<TypePtr>& types, const std::vector<int>& idx, FreshSupply& s);
TermPtr apply_split(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                    FreshSupply& s);
TermPtr apply_fuse(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                   FreshSupply& s);
// Selection &A_i -o &_{i in I} A_i (component projection, generalized).
TermPtr apply_select(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                     FreshSupply& s);

// Specialised operators extended to &-sequence types:
//   zero_H : H,  plus_H : H & H -o H,  times_H : R -o H -o H
TermPtr zero_term(const TypePtr& h);
TermPtr plus_term(const TypePtr& h, FreshSupply& s);
TermPtr times_term(const TypePtr& h, FreshSupply& s);
TermPtr apply_plus(const TypePtr& h, TermPtr a, TermPtr b, FreshSupply& s);
TermPtr apply_times(const TypePtr& h, TermPtr scalar, TermPtr v, FreshSupply& s);

// Canonical basis, inner product and the two halves of the isomorphism with
// the dual space; dual_bar replicates its argument once per dimension, so it
// is deliberately not a safe term.
std::vector<TermPtr> basis_terms(const TypePtr& h);
TermPtr inner_product_term(const TypePtr& h, FreshSupply& s);
TermPtr dual_term(const TypePtr& h, FreshSupply& s);
TermPtr dual_bar_term(const TypePtr& h, FreshSupply& s);

}  // namespace llad
