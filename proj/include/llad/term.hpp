#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "llad/common.hpp"

namespace llad {

// ---------------------------------------------------------------------------
// Types:  R | 1 | Top | A -o B | A * B | A & B | !A
// The affine modality is notation only: sect(A) builds 1 & A.
// ---------------------------------------------------------------------------

enum class TypeKind { Real, Unit, Top, Arrow, Tensor, With, Bang };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    TypeKind kind;
    TypePtr a, b;  // Arrow/Tensor/With: a,b; Bang: a
};

namespace ty {
TypePtr real();
TypePtr unit();
TypePtr top();
TypePtr arrow(TypePtr a, TypePtr b);
TypePtr tensor(TypePtr a, TypePtr b);
TypePtr with(TypePtr a, TypePtr b);
TypePtr bang(TypePtr a);
TypePtr sect(TypePtr a);  // 1 & A
}  // namespace ty

bool type_equal(const TypePtr& a, const TypePtr& b);
bool is_ground(const TypePtr& t);      // no Arrow anywhere
bool is_tensor_seq(const TypePtr& t);  // R | 1 | !D * !E
bool is_with_seq(const TypePtr& t);    // R | Top | H & L
bool is_sect(const TypePtr& t);        // 1 & A

// ---------------------------------------------------------------------------
// Patterns:  x:A | !x:!A | () | (p, q) | <p, q>
// Var/BangVar carry the type of the pattern itself (so BangVar stores !A).
// ---------------------------------------------------------------------------

enum class PatKind { Var, BangVar, Unit, Tensor, With };

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct Pattern {
    PatKind kind;
    std::string name;  // Var, BangVar
    TypePtr type;      // Var, BangVar
    PatternPtr a, b;   // Tensor, With
};

namespace pat {
PatternPtr var(std::string name, TypePtr t);
PatternPtr bangvar(std::string name, TypePtr bang_type);
PatternPtr unit();
PatternPtr tensor(PatternPtr a, PatternPtr b);
PatternPtr with(PatternPtr a, PatternPtr b);
PatternPtr sect(PatternPtr p);  // <(), p>
}  // namespace pat

TypePtr pattern_type(const PatternPtr& p);
void pattern_vars(const PatternPtr& p, std::vector<std::string>& out);
std::vector<std::string> pattern_vars(const PatternPtr& p);
// Types of the variables bound by p (BangVar x : !A binds x at type A).
void pattern_bindings(const PatternPtr& p,
                      std::vector<std::pair<std::string, TypePtr>>& out);
bool pattern_linear(const PatternPtr& p);  // every variable occurs once
bool pattern_equal(const PatternPtr& a, const PatternPtr& b);

// ---------------------------------------------------------------------------
// Terms:  x | lam p.M | (M N) | () | (M,N) | !M | <> | <M,N> | r | f | dot+ | dot*
// ---------------------------------------------------------------------------

enum class TermKind { Var, Lam, App, Unit, Pair, Bang, Top, WithPair, Num, Fun, DotPlus, DotTimes };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    TermKind kind;
    std::string name;  // Var, Fun symbol
    double value = 0;  // Num
    PatternPtr pat;    // Lam
    TermPtr a, b;      // Lam body = a; App/Pair/WithPair a b; Bang a
};

namespace mk {
TermPtr var(std::string name);
TermPtr lam(PatternPtr p, TermPtr body);
TermPtr app(TermPtr f, TermPtr x);
TermPtr unit();
TermPtr pair(TermPtr a, TermPtr b);
TermPtr bang(TermPtr a);
TermPtr top();
TermPtr withpair(TermPtr a, TermPtr b);
TermPtr num(double v);
TermPtr fun(std::string sym);
TermPtr dotplus();
TermPtr dottimes();
// let p = n in m  ==  ((lam p . m) n)
TermPtr let_(PatternPtr p, TermPtr n, TermPtr m);
TermPtr sect(TermPtr m);  // <(), M>
// dot+ <a, b> and (dot* a) b
TermPtr add(TermPtr a, TermPtr b);
TermPtr scale(TermPtr s, TermPtr v);
}  // namespace mk

bool term_equal(const TermPtr& a, const TermPtr& b);
// Structural equality up to renaming of bound variables; free names must agree.
bool alpha_equal(const TermPtr& a, const TermPtr& b);

std::size_t term_size(const TermPtr& t);

// Free variables. The ordered variant lists names by first free occurrence,
// which is the canonical enumeration order used by the transformations.
std::unordered_set<std::string> free_vars(const TermPtr& t);
std::vector<std::string> free_vars_ordered(const TermPtr& t);
// Names of every variable occurring anywhere (free, bound or in patterns).
void all_names(const TermPtr& t, std::unordered_set<std::string>& out);

// ---------------------------------------------------------------------------
// Fresh name supply: names are `hint#counter`, `#` being reserved so that two
// draws never collide with each other or with the avoidance set.
// ---------------------------------------------------------------------------

class FreshSupply {
  public:
    explicit FreshSupply(std::string prefix = "t") : prefix_(std::move(prefix)) {}
    void avoid(const std::string& name) { avoid_.insert(name); }
    void avoid_all_in(const TermPtr& t);
    std::string fresh(const std::string& hint = "");

  private:
    std::string prefix_;
    uint64_t counter_ = 0;
    std::unordered_set<std::string> avoid_;
};

// ---------------------------------------------------------------------------
// Values for patterns and pattern substitution (capture-avoiding).
// ---------------------------------------------------------------------------

bool is_value_for(const TermPtr& v, const PatternPtr& p);

// M{V/p}; throws ShapeMismatch when v is not a value for p.
TermPtr subst(const TermPtr& m, const TermPtr& v, const PatternPtr& p);
TermPtr subst_var(const TermPtr& m, const TermPtr& v, const std::string& x);

// Renames every binder so that bound names are globally distinct and disjoint
// from the supply's avoidance set. Alpha-equivalent to the input.
TermPtr alpha_unique(const TermPtr& t, FreshSupply& supply);

// ---------------------------------------------------------------------------
// Function symbol registry: sin, cos, exp, neg (unary: !R -o !R) and
// add, sub, mul (binary: !R * !R -o !R), each with its partial derivatives.
// Arity bound b = 2.
// ---------------------------------------------------------------------------

struct FunInfo {
    int arity;
    double (*eval1)(double);
    double (*eval2)(double, double);
};

bool is_fun_symbol(const std::string& s);
const FunInfo& fun_info(const std::string& s);
double fun_eval(const std::string& s, const std::vector<double>& args);
TypePtr fun_type(const std::string& s);  // F1 / F2 rule types

// Partial derivative of f with respect to argument i (1-based), as a primal
// term over the given argument variables (used under dereliction, so the
// arguments appear as !x_i). May introduce let-bindings via the supply.
TermPtr fun_deriv_term(const std::string& f, int i,
                       const std::vector<std::string>& args, FreshSupply& supply);

}  // namespace llad
