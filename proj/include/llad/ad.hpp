#pragma once

#include <map>
#include <vector>

#include "llad/term.hpp"

namespace llad {

// Type-preserving partial variable renaming; the domain may be a strict
// subset of the pattern's variables.
struct Renaming {
    std::map<std::string, std::string> map;

    bool contains(const std::string& n) const { return map.count(n) != 0; }
    const std::string& at(const std::string& n) const { return map.at(n); }
    bool empty() const { return map.empty(); }
};

// alpha<p>: renames the components in Dom(alpha), drops the others, and
// stands in a fresh Top variable when no component survives.
PatternPtr pattern_rename(const PatternPtr& p, const Renaming& a, FreshSupply& supply);
// alpha[M]: renames free occurrences only.
TermPtr term_rename(const TermPtr& m, const Renaming& a);
// nu(p, a1, a2): sums shared components, keeps exclusive ones, zeros the rest.
TermPtr nu_term(const PatternPtr& p, const Renaming& a1, const Renaming& a2, FreshSupply& supply);
// mu = lam <a1<p>, a2<p>> . nu(p, a1, a2); requires disjoint codomains.
TermPtr mu_term(const PatternPtr& p, const Renaming& a1, const Renaming& a2, FreshSupply& supply);

// ---------------------------------------------------------------------------
// Forward transformation on the purely primal sort. theta enumerates the
// free variables with their tensor-sequence types (entries !x : !E).
// ---------------------------------------------------------------------------

using FwdTheta = std::vector<std::pair<std::string, TypePtr>>;

TermPtr forward(const TermPtr& p, const FwdTheta& theta, FreshSupply& supply);

// ---------------------------------------------------------------------------
// Unzipping: decomposition into a context of exponential let-definitions, a
// primal and a tangent function, with U(S) = eps[(P, S F)].
// ---------------------------------------------------------------------------

struct UnzipDecomp {
    struct Frame {
        enum class Kind { BangLet, TensorLet } kind;
        PatternPtr pattern;  // !x : !E  or the tensor-sequence pattern
        TermPtr bound;       // BangLet
        std::string z;       // TensorLet scrutinee
    };
    std::vector<Frame> frames;
    TermPtr primal;
    TermPtr tangent;
};

UnzipDecomp unzip_decompose(const TermPtr& s);
TermPtr unzip(const TermPtr& s);
TermPtr eps_wrap(const UnzipDecomp& d, TermPtr body);

// ---------------------------------------------------------------------------
// Transpose. Free affine function variables are renamed through phi_bar,
// which also carries their types (L, H); closed-Phi inputs need neither.
// ---------------------------------------------------------------------------

struct TransposeCtx {
    std::map<std::string, std::string> phi_bar;                      // f -> transposed name
    std::map<std::string, std::pair<TypePtr, TypePtr>> fun_types;    // f -> (L, H)
    std::map<std::string, TypePtr> tan_types;                        // additive variable types
};

TermPtr transpose(const TermPtr& r, FreshSupply& supply, const TransposeCtx& ctx = {});
// Transpose of a lambdaLL^f term (used directly by the duality goldens).
TermPtr transpose_fun(const TermPtr& f, FreshSupply& supply, const TransposeCtx& ctx = {});

// T(F(p)) when skip_unzip, otherwise T(U(F(p))).
TermPtr grad_pipeline_term(const TermPtr& p, const FwdTheta& theta, bool skip_unzip,
                           FreshSupply& supply);

// The naive exponential-size transpose via the dual-space isomorphism,
// used as an oracle: lam q . dual_bar_L (lam p . dual_H q u).
TermPtr dual_transpose_oracle(const TermPtr& u, const PatternPtr& p, const TypePtr& h,
                              FreshSupply& supply);

}  // namespace llad
