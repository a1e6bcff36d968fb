#pragma once

#include <functional>
#include <optional>

#include "llad/numseq.hpp"
#include "llad/term.hpp"

namespace llad {

// Comparison tolerances: exact-pipeline comparisons use max(1e-9, 1e-6|v|),
// finite-difference comparisons 1e-4 with h = 1e-6.
inline bool close_pipeline(double a, double b) { return num_close(a, b, 1e-9) || std::abs(a - b) <= 1e-6 * std::abs(b); }

// Normalizes both closed terms at a sequence type and compares the numeral
// trees componentwise.
bool eq_at_seq_type(const TermPtr& m, const TermPtr& n, const TypePtr& ty, double tol = 1e-9);

struct FunEqVerdict {
    bool equal_on_samples = true;
    std::optional<NumSeq> counterexample;  // input refuting the equivalence
    uint64_t seed = 0;
};

// Samples `trials` random numeral sequences for the input type and compares
// the applications at the output type. A counterexample is definitive;
// agreement is evidence only.
FunEqVerdict eq_at_fun_type(const TermPtr& m, const TermPtr& n, const TypePtr& fun_ty,
                            std::size_t trials, uint64_t seed, double tol = 1e-9);

// Central finite differences (g(x + h e_i) - g(x - h e_i)) / 2h.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& g,
                                     const std::vector<double>& point, double h = 1e-6);

// ---- evaluation helpers shared by the oracle suites ----

// Normalizes a closed term of sequence type to its numeral sequence.
NumSeq eval_to_numseq(const TermPtr& t);

// Normalizes a closed pair (!P, S F) and returns the primal numerals plus
// the tangent function value.
struct PairValue {
    NumSeq primal;
    TermPtr fn;
};
PairValue eval_pair(const TermPtr& t);

// Applies a normalized function value to a rendered numeral sequence.
NumSeq apply_fn(const TermPtr& fn, const NumSeq& arg, const TypePtr& arg_ty);

}  // namespace llad
