#include "llad/syntax.hpp"
#include "llad/translate.hpp"

namespace llad {

// Recognizers for the 4-sorted fragment. Variable roles come from binders
// (exponential, affine-function and additive patterns) plus the caller's
// roles for free variables.

namespace {

using Roles = std::map<std::string, VarRole>;

bool is_sect_pat(const PatternPtr& p) {
    return p->kind == PatKind::With && p->a->kind == PatKind::Unit && p->b->kind == PatKind::Var;
}

bool is_sect_term(const TermPtr& t) {
    return t->kind == TermKind::WithPair && t->a->kind == TermKind::Unit;
}

// let (!x, Sf) = S in R
bool match_let_pair(const TermPtr& t, std::string& x, std::string& f, TermPtr& bound, TermPtr& body) {
    if (t->kind != TermKind::App || t->a->kind != TermKind::Lam) return false;
    const PatternPtr& p = t->a->pat;
    if (p->kind != PatKind::Tensor || p->a->kind != PatKind::BangVar || !is_sect_pat(p->b))
        return false;
    x = p->a->name;
    f = p->b->b->name;
    bound = t->b;
    body = t->a->a;
    return true;
}

// let Sf = SF in G
bool match_let_sect(const TermPtr& t, std::string& f, TermPtr& fun, TermPtr& body) {
    if (t->kind != TermKind::App || t->a->kind != TermKind::Lam) return false;
    if (!is_sect_pat(t->a->pat) || !is_sect_term(t->b)) return false;
    f = t->a->pat->b->name;
    fun = t->b->b;
    body = t->a->a;
    return true;
}

// let !x = P in M
bool match_let_bang(const TermPtr& t, std::string& x, TermPtr& bound, TermPtr& body) {
    if (t->kind != TermKind::App || t->a->kind != TermKind::Lam) return false;
    if (t->a->pat->kind != PatKind::BangVar) return false;
    x = t->a->pat->name;
    bound = t->b;
    body = t->a->a;
    return true;
}

// let p* = z in M, for p* an exponential tensor-sequence pattern
bool match_let_tensor(const TermPtr& t, PatternPtr& p, std::string& z, TermPtr& body) {
    if (t->kind != TermKind::App || t->a->kind != TermKind::Lam) return false;
    const PatternPtr& q = t->a->pat;
    bool shape = q->kind == PatKind::Unit ||
                 (q->kind == PatKind::Tensor && q->a->kind == PatKind::BangVar &&
                  q->b->kind == PatKind::BangVar);
    if (!shape || t->b->kind != TermKind::Var) return false;
    p = q;
    z = t->b->name;
    body = t->a->a;
    return true;
}

bool with_seq_pattern(const PatternPtr& p) {
    switch (p->kind) {
        case PatKind::Var: return is_with_seq(p->type);
        case PatKind::With: return with_seq_pattern(p->a) && with_seq_pattern(p->b);
        default: return false;
    }
}

struct Sorter {
    Roles roles;

    VarRole role_of(const std::string& n) const {
        auto it = roles.find(n);
        if (it == roles.end())
            throw user_error(ErrCode::SortError, "variable '" + n + "' has no assigned role");
        return it->second;
    }

    bool has_role(const std::string& n, VarRole r) const {
        auto it = roles.find(n);
        return it != roles.end() && it->second == r;
    }

    bool isP(const TermPtr& t) {
        switch (t->kind) {
            case TermKind::Bang: {
                const TermPtr& u = t->a;
                if (u->kind == TermKind::Var) return has_role(u->name, VarRole::Primal);
                if (u->kind == TermKind::Num || u->kind == TermKind::Unit) return true;
                if (u->kind == TermKind::Pair) return isP(u->a) && isP(u->b);
                return false;
            }
            case TermKind::App: {
                if (t->a->kind == TermKind::Fun) {
                    const TermPtr& arg = t->b;
                    auto bang_var = [&](const TermPtr& v) {
                        return v->kind == TermKind::Bang &&
                               ((v->a->kind == TermKind::Var && has_role(v->a->name, VarRole::Primal)) ||
                                v->a->kind == TermKind::Num);
                    };
                    if (fun_info(t->a->name).arity == 1) return bang_var(arg);
                    return arg->kind == TermKind::Pair && bang_var(arg->a) && bang_var(arg->b);
                }
                std::string x;
                TermPtr bound, body;
                if (match_let_bang(t, x, bound, body)) {
                    if (!isP(bound)) return false;
                    Sorter inner = *this;
                    inner.roles[x] = VarRole::Primal;
                    return inner.isP(body);
                }
                PatternPtr p;
                std::string z;
                if (match_let_tensor(t, p, z, body)) {
                    if (!has_role(z, VarRole::Primal)) return false;
                    Sorter inner = *this;
                    if (p->kind == PatKind::Tensor) {
                        inner.roles[p->a->name] = VarRole::Primal;
                        inner.roles[p->b->name] = VarRole::Primal;
                    }
                    return inner.isP(body);
                }
                return false;
            }
            default: return false;
        }
    }

    bool isU(const TermPtr& t) {
        switch (t->kind) {
            case TermKind::Num: return t->value == 0.0;
            case TermKind::Var: return has_role(t->name, VarRole::Tangent);
            case TermKind::Top: return true;
            case TermKind::WithPair: return isU(t->a) && isU(t->b);
            case TermKind::App: return isF(t->a) && isU(t->b);
            default: return false;
        }
    }

    bool isF(const TermPtr& t) {
        switch (t->kind) {
            case TermKind::DotPlus: return true;
            case TermKind::Var: return has_role(t->name, VarRole::TanFun);
            case TermKind::Lam: {
                if (!with_seq_pattern(t->pat)) return false;
                Sorter inner = *this;
                for (auto& v : pattern_vars(t->pat)) inner.roles[v] = VarRole::Tangent;
                return inner.isU(t->a);
            }
            case TermKind::App: {
                // dot* x  (scaling by a primal-derelicted or tangent scalar)
                if (t->a->kind == TermKind::DotTimes && t->b->kind == TermKind::Var) return true;
                std::string f;
                TermPtr fun, body;
                if (match_let_sect(t, f, fun, body)) {
                    if (!isF(fun)) return false;
                    Sorter inner = *this;
                    inner.roles[f] = VarRole::TanFun;
                    return inner.isF(body);
                }
                return false;
            }
            default: return false;
        }
    }

    bool isR(const TermPtr& t) {
        // (P, S F)
        if (t->kind == TermKind::Pair && is_sect_term(t->b))
            return isP(t->a) && isF(t->b->b);
        std::string x, f;
        TermPtr bound, fun, body;
        if (match_let_pair(t, x, f, bound, body)) {
            if (!isR(bound)) return false;
            Sorter inner = *this;
            inner.roles[x] = VarRole::Primal;
            inner.roles[f] = VarRole::TanFun;
            return inner.isR(body);
        }
        if (match_let_sect(t, f, fun, body)) {
            if (!isF(fun)) return false;
            Sorter inner = *this;
            inner.roles[f] = VarRole::TanFun;
            return inner.isR(body);
        }
        if (match_let_bang(t, x, bound, body)) {
            if (!isP(bound)) return false;
            Sorter inner = *this;
            inner.roles[x] = VarRole::Primal;
            return inner.isR(body);
        }
        PatternPtr p;
        std::string z;
        if (match_let_tensor(t, p, z, body)) {
            if (!has_role(z, VarRole::Primal)) return false;
            Sorter inner = *this;
            if (p->kind == PatKind::Tensor) {
                inner.roles[p->a->name] = VarRole::Primal;
                inner.roles[p->b->name] = VarRole::Primal;
            }
            return inner.isR(body);
        }
        return false;
    }
};

Roles seed_roles(const TermPtr& t, const Roles& given) {
    Roles roles = given;
    // free variables default to primal unless stated otherwise
    for (auto& v : free_vars_ordered(t))
        if (!roles.count(v)) roles[v] = VarRole::Primal;
    return roles;
}

}  // namespace

bool in_sort(const TermPtr& t, Sort s, const Roles& free_roles) {
    Sorter sorter{seed_roles(t, free_roles)};
    switch (s) {
        case Sort::P: return sorter.isP(t);
        case Sort::U: return sorter.isU(t);
        case Sort::F: return sorter.isF(t);
        case Sort::R: return sorter.isR(t);
    }
    return false;
}

SortedTerm sort_check(const TermPtr& t, const Roles& free_roles) {
    // program sorts only: the purely primal fragment and the full fragment
    if (in_sort(t, Sort::P, free_roles)) return {Sort::P, t};
    if (in_sort(t, Sort::R, free_roles)) return {Sort::R, t};
    throw user_error(ErrCode::SortError,
                     "term is not in the sorted fragment: " + print_term(t));
}

}  // namespace llad
