#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "llad/numseq.hpp"
#include "llad/term.hpp"

namespace llad::lina {

// ------------------------------------------------------------------- types

enum class JKind { Real, One, Tensor };

struct JaxType;
using JTPtr = std::shared_ptr<const JaxType>;

struct JaxType {
    JKind kind;
    JTPtr a, b;
};

JTPtr jt_real();
JTPtr jt_one();
JTPtr jt_tensor(JTPtr a, JTPtr b);
bool jt_equal(const JTPtr& a, const JTPtr& b);
std::string print_jtype(const JTPtr& t);
JTPtr parse_jtype(const std::string& src);
std::size_t jax_workload_type(const JTPtr& t);  // occurrences of R

NumSeq numseq_zero_of(const JTPtr& t);
NumSeq numseq_random_of(const JTPtr& t, Rng& rng, double lo = -2.0, double hi = 2.0);

// --------------------------------------------------------------- expressions
//
// Core Linear A plus the notational conventions of Linear B. Tangent
// identifiers end in a prime; the constructors below do not enforce it but
// the surface parser does.

enum class LKind {
    // core
    VarPair,    // (x; y')
    LetPair,    // let (x; y') = e1 in e2
    TupP0,      // tupP()
    TupP2,      // tupP(x1, x2)
    LetTupP0,   // let tupP() = z in e
    LetTupP2,   // let tupP(x1, x2) = z in e
    TupT0,      // tupT()
    TupT2,      // tupT(y1', y2')
    LetTupT0,   // let tupT() = z' in e
    LetTupT2,   // let tupT(y1', y2') = z' in e
    Num,        // r
    PrimApp,    // f(x1, ..., xn)
    Zero,       // zero : T
    Add,        // x' +. y'
    Scale,      // x *. y'
    Dup,        // dup(x')
    Drop,       // drop(e)
    // syntactic sugar
    PrimVar,    // x
    TanVar,     // x'
    LetPrim,    // let x = e1 in e2
    LetTan,     // let y' = e1 in e2
    PairE,      // (e1; e2)
    TupPE,      // tupP(e1, e2)
    TupTE,      // tupT(e1, e2)
};

struct LinExpr;
using LinPtr = std::shared_ptr<const LinExpr>;

struct LinExpr {
    LKind kind;
    std::string x, y, z;        // names; x primal-ish, y tangent-ish, z scrutinee
    double value = 0;           // Num
    std::string fn;             // PrimApp
    std::vector<std::string> args;
    JTPtr ty;                   // Zero
    LinPtr a, b;
};

namespace le {
LinPtr var_pair(std::string x, std::string y);
LinPtr let_pair(std::string x, std::string y, LinPtr e1, LinPtr e2);
LinPtr tup_p0();
LinPtr tup_p2(std::string x1, std::string x2);
LinPtr let_tup_p0(std::string z, LinPtr e);
LinPtr let_tup_p2(std::string x1, std::string x2, std::string z, LinPtr e);
LinPtr tup_t0();
LinPtr tup_t2(std::string y1, std::string y2);
LinPtr let_tup_t0(std::string z, LinPtr e);
LinPtr let_tup_t2(std::string y1, std::string y2, std::string z, LinPtr e);
LinPtr num(double v);
LinPtr prim(std::string fn, std::vector<std::string> args);
LinPtr zero(JTPtr ty);
LinPtr add(std::string x, std::string y);
LinPtr scale(std::string x, std::string y);
LinPtr dup(std::string y);
LinPtr drop(LinPtr e);
LinPtr prim_var(std::string x);
LinPtr tan_var(std::string y);
LinPtr let_prim(std::string x, LinPtr e1, LinPtr e2);
LinPtr let_tan(std::string y, LinPtr e1, LinPtr e2);
// smart constructors: collapse to core forms when both sides are variables
LinPtr pair_e(LinPtr a, LinPtr b);
LinPtr tup_pe(LinPtr a, LinPtr b);
LinPtr tup_te(LinPtr a, LinPtr b);
}  // namespace le

bool lin_equal(const LinPtr& a, const LinPtr& b);
bool lin_alpha_equal(const LinPtr& a, const LinPtr& b);

// Free variables, in first-occurrence order (the canonical enumeration).
std::vector<std::string> fv_primal(const LinPtr& e);
std::vector<std::string> fv_tangent(const LinPtr& e);

// ----------------------------------------------------------------- judgments

struct JaxJudgment {
    std::vector<std::pair<std::string, JTPtr>> primal_env;   // first occurrence order
    std::vector<std::pair<std::string, JTPtr>> tangent_env;  // canonical theta
    JTPtr primal_type;
    JTPtr tangent_type;

    JTPtr primal_of(const std::string& x) const;
    JTPtr tangent_of(const std::string& y) const;
};

// Type checking / inference for the core rules plus the derived sugar rules.
// Unannotated free variables default to R unless structurally constrained.
JaxJudgment jax_check(const LinPtr& e);

// Full inference result: judgment plus per-node and per-variable types
// (bound variables included). Used by the transformations.
struct LinTyping {
    JaxJudgment judgment;
    std::unordered_map<const LinExpr*, std::pair<JTPtr, JTPtr>> node_types;
    std::unordered_map<std::string, JTPtr> primal_types, tangent_types;
};
LinTyping jax_infer(const LinPtr& e);

// -------------------------------------------------------------- evaluation

using NumEnv = std::map<std::string, NumSeq>;

struct JaxValue {
    NumSeq primal;
    NumSeq tangent;
};

JaxValue jax_eval(const LinPtr& e, const NumEnv& primals, const NumEnv& tangents);

std::size_t jax_workload(const LinPtr& e);

// --------------------------------------------------------------- structure

// Linear B sort recognizers (on the sugar-level grammar).
bool is_primal_expr(const LinPtr& e);
bool is_tangent_expr(const LinPtr& e);
bool is_linear_b(const LinPtr& d);

// Desugars to the core grammar (fresh names drawn from the supply).
LinPtr desugar(const LinPtr& e, FreshSupply& supply);
// Renames binders so all bound names are globally fresh.
LinPtr lin_alpha_unique(const LinPtr& e, FreshSupply& supply);
void lin_all_names(const LinPtr& e, std::unordered_set<std::string>& out);

// ------------------------------------------------------------------ surface

std::string print_lin(const LinPtr& e);
LinPtr parse_lin(const std::string& src);

}  // namespace llad::lina
