#include "llad/term.hpp"

#include <cmath>
#include <cstdio>

namespace llad {

const char* errcode_name(ErrCode c) {
    switch (c) {
        case ErrCode::Parse: return "ParseError";
        case ErrCode::UnboundVar: return "UnboundVar";
        case ErrCode::LinearityViolation: return "LinearityViolation";
        case ErrCode::NonExponentialDuplication: return "NonExponentialDuplication";
        case ErrCode::TypeMismatch: return "TypeMismatch";
        case ErrCode::ShapeMismatch: return "ShapeMismatch";
        case ErrCode::IllTyped: return "IllTyped";
        case ErrCode::NotSafe: return "NotSafe";
        case ErrCode::NotClosed: return "NotClosed";
        case ErrCode::SortError: return "SortError";
        case ErrCode::TangentLinearityViolation: return "TangentLinearityViolation";
        case ErrCode::NotPrimal: return "NotPrimal";
        case ErrCode::NotSortR: return "NotSortR";
        case ErrCode::DegreeOverflow: return "DegreeOverflow";
        case ErrCode::FuelExhausted: return "FuelExhausted";
        case ErrCode::Usage: return "Usage";
    }
    return "Error";
}

std::string fmt_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; prec++) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// --------------------------------------------------------------------- types

namespace ty {
TypePtr real() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Real, nullptr, nullptr});
    return t;
}
TypePtr unit() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Unit, nullptr, nullptr});
    return t;
}
TypePtr top() {
    static TypePtr t = std::make_shared<Type>(Type{TypeKind::Top, nullptr, nullptr});
    return t;
}
TypePtr arrow(TypePtr a, TypePtr b) {
    return std::make_shared<Type>(Type{TypeKind::Arrow, std::move(a), std::move(b)});
}
TypePtr tensor(TypePtr a, TypePtr b) {
    return std::make_shared<Type>(Type{TypeKind::Tensor, std::move(a), std::move(b)});
}
TypePtr with(TypePtr a, TypePtr b) {
    return std::make_shared<Type>(Type{TypeKind::With, std::move(a), std::move(b)});
}
TypePtr bang(TypePtr a) {
    return std::make_shared<Type>(Type{TypeKind::Bang, std::move(a), nullptr});
}
TypePtr sect(TypePtr a) { return with(unit(), std::move(a)); }
}  // namespace ty

bool type_equal(const TypePtr& a, const TypePtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case TypeKind::Real:
        case TypeKind::Unit:
        case TypeKind::Top: return true;
        case TypeKind::Bang: return type_equal(a->a, b->a);
        default: return type_equal(a->a, b->a) && type_equal(a->b, b->b);
    }
}

bool is_ground(const TypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real:
        case TypeKind::Unit:
        case TypeKind::Top: return true;
        case TypeKind::Arrow: return false;
        case TypeKind::Bang: return is_ground(t->a);
        default: return is_ground(t->a) && is_ground(t->b);
    }
}

bool is_tensor_seq(const TypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real:
        case TypeKind::Unit: return true;
        case TypeKind::Tensor:
            return t->a->kind == TypeKind::Bang && t->b->kind == TypeKind::Bang &&
                   is_tensor_seq(t->a->a) && is_tensor_seq(t->b->a);
        default: return false;
    }
}

bool is_with_seq(const TypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real:
        case TypeKind::Top: return true;
        case TypeKind::With: return is_with_seq(t->a) && is_with_seq(t->b);
        default: return false;
    }
}

bool is_sect(const TypePtr& t) {
    return t->kind == TypeKind::With && t->a->kind == TypeKind::Unit;
}

// ------------------------------------------------------------------ patterns

namespace pat {
PatternPtr var(std::string name, TypePtr t) {
    return std::make_shared<Pattern>(Pattern{PatKind::Var, std::move(name), std::move(t), nullptr, nullptr});
}
PatternPtr bangvar(std::string name, TypePtr t) {
    return std::make_shared<Pattern>(Pattern{PatKind::BangVar, std::move(name), std::move(t), nullptr, nullptr});
}
PatternPtr unit() {
    static PatternPtr p = std::make_shared<Pattern>(Pattern{PatKind::Unit, "", nullptr, nullptr, nullptr});
    return p;
}
PatternPtr tensor(PatternPtr a, PatternPtr b) {
    return std::make_shared<Pattern>(Pattern{PatKind::Tensor, "", nullptr, std::move(a), std::move(b)});
}
PatternPtr with(PatternPtr a, PatternPtr b) {
    return std::make_shared<Pattern>(Pattern{PatKind::With, "", nullptr, std::move(a), std::move(b)});
}
PatternPtr sect(PatternPtr p) { return with(unit(), std::move(p)); }
}  // namespace pat

TypePtr pattern_type(const PatternPtr& p) {
    switch (p->kind) {
        case PatKind::Var:
        case PatKind::BangVar: return p->type;
        case PatKind::Unit: return ty::unit();
        case PatKind::Tensor: return ty::tensor(pattern_type(p->a), pattern_type(p->b));
        case PatKind::With: return ty::with(pattern_type(p->a), pattern_type(p->b));
    }
    throw internal_error("pattern_type");
}

void pattern_vars(const PatternPtr& p, std::vector<std::string>& out) {
    switch (p->kind) {
        case PatKind::Var:
        case PatKind::BangVar: out.push_back(p->name); return;
        case PatKind::Unit: return;
        default:
            pattern_vars(p->a, out);
            pattern_vars(p->b, out);
    }
}

std::vector<std::string> pattern_vars(const PatternPtr& p) {
    std::vector<std::string> out;
    pattern_vars(p, out);
    return out;
}

void pattern_bindings(const PatternPtr& p, std::vector<std::pair<std::string, TypePtr>>& out) {
    switch (p->kind) {
        case PatKind::Var: out.emplace_back(p->name, p->type); return;
        case PatKind::BangVar:
            // !x : !A binds x at type A (dereliction)
            out.emplace_back(p->name, p->type->kind == TypeKind::Bang ? p->type->a : p->type);
            return;
        case PatKind::Unit: return;
        default:
            pattern_bindings(p->a, out);
            pattern_bindings(p->b, out);
    }
}

bool pattern_linear(const PatternPtr& p) {
    auto vs = pattern_vars(p);
    std::unordered_set<std::string> seen;
    for (auto& v : vs)
        if (!seen.insert(v).second) return false;
    return true;
}

bool pattern_equal(const PatternPtr& a, const PatternPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case PatKind::Var:
        case PatKind::BangVar: return a->name == b->name && type_equal(a->type, b->type);
        case PatKind::Unit: return true;
        default: return pattern_equal(a->a, b->a) && pattern_equal(a->b, b->b);
    }
}

// --------------------------------------------------------------------- terms

namespace mk {
static TermPtr node(Term t) { return std::make_shared<Term>(std::move(t)); }

TermPtr var(std::string name) {
    Term t{};
    t.kind = TermKind::Var;
    t.name = std::move(name);
    return node(std::move(t));
}
TermPtr lam(PatternPtr p, TermPtr body) {
    Term t{};
    t.kind = TermKind::Lam;
    t.pat = std::move(p);
    t.a = std::move(body);
    return node(std::move(t));
}
TermPtr app(TermPtr f, TermPtr x) {
    Term t{};
    t.kind = TermKind::App;
    t.a = std::move(f);
    t.b = std::move(x);
    return node(std::move(t));
}
TermPtr unit() {
    Term t{};
    t.kind = TermKind::Unit;
    return node(std::move(t));
}
TermPtr pair(TermPtr a, TermPtr b) {
    Term t{};
    t.kind = TermKind::Pair;
    t.a = std::move(a);
    t.b = std::move(b);
    return node(std::move(t));
}
TermPtr bang(TermPtr a) {
    Term t{};
    t.kind = TermKind::Bang;
    t.a = std::move(a);
    return node(std::move(t));
}
TermPtr top() {
    Term t{};
    t.kind = TermKind::Top;
    return node(std::move(t));
}
TermPtr withpair(TermPtr a, TermPtr b) {
    Term t{};
    t.kind = TermKind::WithPair;
    t.a = std::move(a);
    t.b = std::move(b);
    return node(std::move(t));
}
TermPtr num(double v) {
    Term t{};
    t.kind = TermKind::Num;
    t.value = v;
    return node(std::move(t));
}
TermPtr fun(std::string sym) {
    Term t{};
    t.kind = TermKind::Fun;
    t.name = std::move(sym);
    return node(std::move(t));
}
TermPtr dotplus() {
    Term t{};
    t.kind = TermKind::DotPlus;
    return node(std::move(t));
}
TermPtr dottimes() {
    Term t{};
    t.kind = TermKind::DotTimes;
    return node(std::move(t));
}
TermPtr let_(PatternPtr p, TermPtr n, TermPtr m) { return app(lam(std::move(p), std::move(m)), std::move(n)); }
TermPtr sect(TermPtr m) { return withpair(unit(), std::move(m)); }
TermPtr add(TermPtr a, TermPtr b) { return app(dotplus(), withpair(std::move(a), std::move(b))); }
TermPtr scale(TermPtr s, TermPtr v) { return app(app(dottimes(), std::move(s)), std::move(v)); }
}  // namespace mk

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case TermKind::Var:
        case TermKind::Fun: return a->name == b->name;
        case TermKind::Num: return a->value == b->value;
        case TermKind::Unit:
        case TermKind::Top:
        case TermKind::DotPlus:
        case TermKind::DotTimes: return true;
        case TermKind::Lam:
            return pattern_equal(a->pat, b->pat) && term_equal(a->a, b->a);
        case TermKind::Bang: return term_equal(a->a, b->a);
        default: return term_equal(a->a, b->a) && term_equal(a->b, b->b);
    }
}

namespace {

bool alpha_pat(const PatternPtr& a, const PatternPtr& b,
               std::unordered_map<std::string, std::string>& m) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case PatKind::Var:
        case PatKind::BangVar:
            if (!type_equal(a->type, b->type)) return false;
            m[a->name] = b->name;
            return true;
        case PatKind::Unit: return true;
        default: return alpha_pat(a->a, b->a, m) && alpha_pat(a->b, b->b, m);
    }
}

bool alpha_rec(const TermPtr& a, const TermPtr& b,
               std::unordered_map<std::string, std::string> m) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case TermKind::Var: {
            auto it = m.find(a->name);
            return it != m.end() ? it->second == b->name : a->name == b->name;
        }
        case TermKind::Fun: return a->name == b->name;
        case TermKind::Num: return a->value == b->value;
        case TermKind::Unit:
        case TermKind::Top:
        case TermKind::DotPlus:
        case TermKind::DotTimes: return true;
        case TermKind::Lam: {
            if (!alpha_pat(a->pat, b->pat, m)) return false;
            return alpha_rec(a->a, b->a, m);
        }
        case TermKind::Bang: return alpha_rec(a->a, b->a, m);
        default: return alpha_rec(a->a, b->a, m) && alpha_rec(a->b, b->b, m);
    }
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) { return alpha_rec(a, b, {}); }

std::size_t term_size(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Lam:
        case TermKind::Bang: return 1 + term_size(t->a);
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair: return 1 + term_size(t->a) + term_size(t->b);
        default: return 1;
    }
}

namespace {

void fv_rec(const TermPtr& t, std::unordered_set<std::string>& bound,
            std::vector<std::string>& order, std::unordered_set<std::string>& seen) {
    switch (t->kind) {
        case TermKind::Var:
            if (!bound.count(t->name) && seen.insert(t->name).second) order.push_back(t->name);
            return;
        case TermKind::Lam: {
            auto vs = pattern_vars(t->pat);
            std::vector<std::string> added;
            for (auto& v : vs)
                if (bound.insert(v).second) added.push_back(v);
            fv_rec(t->a, bound, order, seen);
            for (auto& v : added) bound.erase(v);
            return;
        }
        case TermKind::Bang: fv_rec(t->a, bound, order, seen); return;
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair:
            fv_rec(t->a, bound, order, seen);
            fv_rec(t->b, bound, order, seen);
            return;
        default: return;
    }
}

}  // namespace

std::vector<std::string> free_vars_ordered(const TermPtr& t) {
    std::unordered_set<std::string> bound, seen;
    std::vector<std::string> order;
    fv_rec(t, bound, order, seen);
    return order;
}

std::unordered_set<std::string> free_vars(const TermPtr& t) {
    auto v = free_vars_ordered(t);
    return {v.begin(), v.end()};
}

void all_names(const TermPtr& t, std::unordered_set<std::string>& out) {
    switch (t->kind) {
        case TermKind::Var: out.insert(t->name); return;
        case TermKind::Lam: {
            for (auto& v : pattern_vars(t->pat)) out.insert(v);
            all_names(t->a, out);
            return;
        }
        case TermKind::Bang: all_names(t->a, out); return;
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair:
            all_names(t->a, out);
            all_names(t->b, out);
            return;
        default: return;
    }
}

void FreshSupply::avoid_all_in(const TermPtr& t) { all_names(t, avoid_); }

std::string FreshSupply::fresh(const std::string& hint) {
    const std::string& base = hint.empty() ? prefix_ : hint;
    for (;;) {
        std::string name = base + "#" + std::to_string(counter_++);
        if (avoid_.insert(name).second) return name;
    }
}

// ---------------------------------------------------------- values and subst

bool is_value_for(const TermPtr& v, const PatternPtr& p) {
    switch (p->kind) {
        case PatKind::Var: return true;
        case PatKind::BangVar: return v->kind == TermKind::Bang;
        case PatKind::Unit: return v->kind == TermKind::Unit;
        case PatKind::Tensor:
            return v->kind == TermKind::Pair && is_value_for(v->a, p->a) && is_value_for(v->b, p->b);
        case PatKind::With:
            return v->kind == TermKind::WithPair && is_value_for(v->a, p->a) && is_value_for(v->b, p->b);
    }
    return false;
}

namespace {

PatternPtr rename_pattern(const PatternPtr& p,
                          const std::unordered_map<std::string, std::string>& m) {
    switch (p->kind) {
        case PatKind::Var: {
            auto it = m.find(p->name);
            return pat::var(it == m.end() ? p->name : it->second, p->type);
        }
        case PatKind::BangVar: {
            auto it = m.find(p->name);
            return pat::bangvar(it == m.end() ? p->name : it->second, p->type);
        }
        case PatKind::Unit: return p;
        case PatKind::Tensor: return pat::tensor(rename_pattern(p->a, m), rename_pattern(p->b, m));
        case PatKind::With: return pat::with(rename_pattern(p->a, m), rename_pattern(p->b, m));
    }
    throw internal_error("rename_pattern");
}

TermPtr subst_var_rec(const TermPtr& m, const TermPtr& v, const std::string& x,
                      const std::unordered_set<std::string>& fv_v, FreshSupply& supply) {
    switch (m->kind) {
        case TermKind::Var: return m->name == x ? v : m;
        case TermKind::Lam: {
            auto vs = pattern_vars(m->pat);
            for (auto& bv : vs)
                if (bv == x) return m;  // x shadowed
            bool capture = false;
            for (auto& bv : vs)
                if (fv_v.count(bv)) { capture = true; break; }
            PatternPtr p = m->pat;
            TermPtr body = m->a;
            if (capture) {
                std::unordered_map<std::string, std::string> ren;
                for (auto& bv : vs)
                    if (fv_v.count(bv)) ren[bv] = supply.fresh(bv.substr(0, bv.find('#')));
                p = rename_pattern(p, ren);
                for (auto& [from, to] : ren) body = subst_var(body, mk::var(to), from);
            }
            return mk::lam(p, subst_var_rec(body, v, x, fv_v, supply));
        }
        case TermKind::Bang: return mk::bang(subst_var_rec(m->a, v, x, fv_v, supply));
        case TermKind::App:
            return mk::app(subst_var_rec(m->a, v, x, fv_v, supply), subst_var_rec(m->b, v, x, fv_v, supply));
        case TermKind::Pair:
            return mk::pair(subst_var_rec(m->a, v, x, fv_v, supply), subst_var_rec(m->b, v, x, fv_v, supply));
        case TermKind::WithPair:
            return mk::withpair(subst_var_rec(m->a, v, x, fv_v, supply), subst_var_rec(m->b, v, x, fv_v, supply));
        default: return m;
    }
}

}  // namespace

TermPtr subst_var(const TermPtr& m, const TermPtr& v, const std::string& x) {
    if (!free_vars(m).count(x)) return m;
    FreshSupply supply;
    supply.avoid_all_in(m);
    supply.avoid_all_in(v);
    return subst_var_rec(m, v, x, free_vars(v), supply);
}

TermPtr subst(const TermPtr& m, const TermPtr& v, const PatternPtr& p) {
    if (!is_value_for(v, p))
        throw user_error(ErrCode::ShapeMismatch, "substituted term is not a value for the pattern");
    switch (p->kind) {
        case PatKind::Unit: return m;
        case PatKind::Var: return subst_var(m, v, p->name);
        case PatKind::BangVar: return subst_var(m, v->a, p->name);
        case PatKind::Tensor:
        case PatKind::With: return subst(subst(m, v->a, p->a), v->b, p->b);
    }
    throw internal_error("subst");
}

TermPtr alpha_unique(const TermPtr& t, FreshSupply& supply) {
    switch (t->kind) {
        case TermKind::Lam: {
            std::unordered_map<std::string, std::string> ren;
            for (auto& bv : pattern_vars(t->pat)) ren[bv] = supply.fresh(bv.substr(0, bv.find('#')));
            PatternPtr p = rename_pattern(t->pat, ren);
            TermPtr body = t->a;
            for (auto& [from, to] : ren) body = subst_var(body, mk::var(to), from);
            return mk::lam(p, alpha_unique(body, supply));
        }
        case TermKind::Bang: return mk::bang(alpha_unique(t->a, supply));
        case TermKind::App: {
            auto a = alpha_unique(t->a, supply);
            return mk::app(a, alpha_unique(t->b, supply));
        }
        case TermKind::Pair: {
            auto a = alpha_unique(t->a, supply);
            return mk::pair(a, alpha_unique(t->b, supply));
        }
        case TermKind::WithPair: {
            auto a = alpha_unique(t->a, supply);
            return mk::withpair(a, alpha_unique(t->b, supply));
        }
        default: return t;
    }
}

// ------------------------------------------------------------------ registry

namespace {

double neg_(double x) { return -x; }
double add_(double a, double b) { return a + b; }
double sub_(double a, double b) { return a - b; }
double mul_(double a, double b) { return a * b; }

const std::unordered_map<std::string, FunInfo>& registry() {
    static const std::unordered_map<std::string, FunInfo> reg = {
        {"sin", {1, std::sin, nullptr}}, {"cos", {1, std::cos, nullptr}},
        {"exp", {1, std::exp, nullptr}}, {"neg", {1, neg_, nullptr}},
        {"add", {2, nullptr, add_}},     {"sub", {2, nullptr, sub_}},
        {"mul", {2, nullptr, mul_}},
    };
    return reg;
}

}  // namespace

bool is_fun_symbol(const std::string& s) { return registry().count(s) != 0; }

const FunInfo& fun_info(const std::string& s) {
    auto it = registry().find(s);
    if (it == registry().end()) throw user_error(ErrCode::UnboundVar, "unknown function symbol: " + s);
    return it->second;
}

double fun_eval(const std::string& s, const std::vector<double>& args) {
    const FunInfo& fi = fun_info(s);
    if (int(args.size()) != fi.arity) throw internal_error("fun_eval arity for " + s);
    return fi.arity == 1 ? fi.eval1(args[0]) : fi.eval2(args[0], args[1]);
}

TypePtr fun_type(const std::string& s) {
    auto br = ty::bang(ty::real());
    return fun_info(s).arity == 1 ? ty::arrow(br, br) : ty::arrow(ty::tensor(br, br), br);
}

TermPtr fun_deriv_term(const std::string& f, int i, const std::vector<std::string>& args,
                       FreshSupply& supply) {
    auto barg = [&](int k) { return mk::bang(mk::var(args[size_t(k)])); };
    if (f == "sin") return mk::app(mk::fun("cos"), barg(0));
    if (f == "cos") {
        // -sin x, via an intermediate binding since arguments must be variables
        std::string t = supply.fresh("d");
        return mk::let_(pat::bangvar(t, ty::bang(ty::real())), mk::app(mk::fun("sin"), barg(0)),
                        mk::app(mk::fun("neg"), mk::bang(mk::var(t))));
    }
    if (f == "exp") return mk::app(mk::fun("exp"), barg(0));
    if (f == "neg") return mk::bang(mk::num(-1.0));
    if (f == "add") return mk::bang(mk::num(1.0));
    if (f == "sub") return mk::bang(mk::num(i == 1 ? 1.0 : -1.0));
    if (f == "mul") return barg(i == 1 ? 1 : 0);
    throw user_error(ErrCode::UnboundVar, "no derivative for symbol: " + f);
}

}  // namespace llad
