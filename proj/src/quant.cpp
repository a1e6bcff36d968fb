#include "llad/quant.hpp"

#include <functional>

#include <algorithm>

#include "llad/eval.hpp"
#include "llad/syntax.hpp"
#include "llad/workload.hpp"

namespace llad {

namespace {
constexpr std::size_t kDegreeCap = 1u << 20;

DecTypePtr dnode(TypeKind k, std::size_t deg, DecTypePtr a, DecTypePtr b) {
    return std::make_shared<DecType>(DecType{k, deg, std::move(a), std::move(b)});
}
}  // namespace

DecTypePtr decorate(const TypePtr& t, std::size_t k) {
    switch (t->kind) {
        case TypeKind::Real:
        case TypeKind::Unit:
        case TypeKind::Top: return dnode(t->kind, 1, nullptr, nullptr);
        case TypeKind::Bang: return dnode(t->kind, 1, decorate(t->a, k), nullptr);
        case TypeKind::Arrow: return dnode(t->kind, k, decorate(t->a, k), decorate(t->b, k));
        default: return dnode(t->kind, 1, decorate(t->a, k), decorate(t->b, k));
    }
}

TypePtr erase(const DecTypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real: return ty::real();
        case TypeKind::Unit: return ty::unit();
        case TypeKind::Top: return ty::top();
        case TypeKind::Bang: return ty::bang(erase(t->a));
        case TypeKind::Arrow: return ty::arrow(erase(t->a), erase(t->b));
        case TypeKind::Tensor: return ty::tensor(erase(t->a), erase(t->b));
        case TypeKind::With: return ty::with(erase(t->a), erase(t->b));
    }
    throw internal_error("erase");
}

std::string print_dectype(const DecTypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real: return "R";
        case TypeKind::Unit: return "1";
        case TypeKind::Top: return "Top";
        case TypeKind::Bang: return "!" + print_dectype(t->a);
        case TypeKind::Arrow: {
            std::string lhs = print_dectype(t->a);
            if (t->a->kind == TypeKind::Arrow) lhs = "(" + lhs + ")";
            return lhs + " -o^" + std::to_string(t->k) + " " + print_dectype(t->b);
        }
        case TypeKind::Tensor: {
            std::string lhs = print_dectype(t->a), rhs = print_dectype(t->b);
            if (t->a->kind == TypeKind::Arrow || t->a->kind == TypeKind::With ||
                t->a->kind == TypeKind::Tensor)
                lhs = "(" + lhs + ")";
            if (t->b->kind == TypeKind::Arrow) rhs = "(" + rhs + ")";
            return lhs + " * " + rhs;
        }
        case TypeKind::With: {
            std::string lhs = print_dectype(t->a), rhs = print_dectype(t->b);
            if (t->a->kind == TypeKind::Arrow || t->a->kind == TypeKind::With)
                lhs = "(" + lhs + ")";
            if (t->b->kind == TypeKind::Arrow) rhs = "(" + rhs + ")";
            return lhs + " & " + rhs;
        }
    }
    return "";
}

bool degree_pinned(const TypePtr& t) { return t->kind == TypeKind::Bang || is_ground(t); }

std::size_t scale_degree(std::size_t k, std::size_t k2, const TypePtr& t) {
    if (degree_pinned(t)) return 1;
    std::size_t v = k * k2;
    if (v > kDegreeCap) throw user_error(ErrCode::DegreeOverflow, "additive degree exceeds the cap");
    return v;
}

std::size_t add_degree(std::size_t k1, std::size_t k2, const TypePtr& t) {
    if (degree_pinned(t)) return 1;
    std::size_t v = k1 + k2;
    if (v > kDegreeCap) throw user_error(ErrCode::DegreeOverflow, "additive degree exceeds the cap");
    return v;
}

Decoration env_scale(std::size_t k, const Decoration& d) {
    Decoration out = d;
    for (auto& e : out) e.degree = scale_degree(k, e.degree, erase(e.type));
    return out;
}

Decoration env_add(const Decoration& d1, const Decoration& d2) {
    Decoration out = d1;
    for (auto& e2 : d2) {
        bool merged = false;
        for (auto& e1 : out) {
            if (pattern_equal(e1.pattern, e2.pattern)) {
                e1.degree = add_degree(e1.degree, e2.degree, erase(e1.type));
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(e2);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct QChecker {
    std::map<std::string, DecTypePtr> scope;
    bool quant_safe = true;
    std::vector<std::string> violations;
    std::map<std::string, std::size_t> binder_degrees;

    struct Res {
        std::size_t m = 0;
        DecTypePtr ty;
        std::map<std::string, std::size_t> deg;  // raw additive usage per free variable
    };

    static std::size_t cap_add(std::size_t a, std::size_t b) {
        std::size_t v = a + b;
        if (v > kDegreeCap) throw user_error(ErrCode::DegreeOverflow, "additive degree exceeds the cap");
        return v;
    }

    std::size_t deg_of(const Res& r, const std::string& v) const {
        auto it = r.deg.find(v);
        return it == r.deg.end() ? 1 : it->second;
    }

    Res run(const TermPtr& t) {
        switch (t->kind) {
            case TermKind::Var: {
                auto it = scope.find(t->name);
                if (it == scope.end())
                    throw user_error(ErrCode::UnboundVar,
                                     "unbound variable '" + t->name + "' in quantitative check");
                Res r;
                r.ty = it->second;
                r.deg[t->name] = 1;
                return r;
            }
            case TermKind::Num: {
                Res r;
                r.ty = decorate(ty::real());
                return r;
            }
            case TermKind::Top: {
                Res r;
                r.ty = decorate(ty::top());
                return r;
            }
            case TermKind::Unit: {
                Res r;
                r.ty = decorate(ty::unit());
                return r;
            }
            case TermKind::Fun: {
                Res r;
                r.m = 1;
                r.ty = decorate(fun_type(t->name));
                return r;
            }
            case TermKind::DotPlus: {
                Res r;
                r.m = 1;
                r.ty = decorate(ty::arrow(ty::with(ty::real(), ty::real()), ty::real()));
                return r;
            }
            case TermKind::DotTimes: {
                Res r;
                r.m = 1;
                r.ty = decorate(ty::arrow(ty::real(), ty::arrow(ty::real(), ty::real())));
                return r;
            }
            case TermKind::Bang: {
                Res inner = run(t->a);
                if (inner.m != 0) {
                    quant_safe = false;
                    violations.push_back("!-box derives at index " + std::to_string(inner.m) +
                                         ": !" + print_term(t->a));
                }
                Res r;
                r.m = 0;  // boxed work is banked
                r.ty = dnode(TypeKind::Bang, 1, inner.ty, nullptr);
                for (auto& [v, _] : inner.deg) r.deg[v] = 1;  // promoted entries are exponential
                return r;
            }
            case TermKind::Lam: {
                std::vector<std::pair<std::string, TypePtr>> binds;
                pattern_bindings(t->pat, binds);
                std::map<std::string, DecTypePtr> saved;
                for (auto& [n, bt] : binds) {
                    auto it = scope.find(n);
                    if (it != scope.end()) saved[n] = it->second;
                    scope[n] = decorate(bt);
                }
                Res body = run(t->a);
                std::size_t k = 1;
                auto fvb = free_vars(t->a);
                for (auto& [n, bt] : binds) {
                    std::size_t raw = body.deg.count(n) ? body.deg[n] : 1;
                    binder_degrees[n] = raw;
                    if (!degree_pinned(bt)) k = std::max(k, raw);
                }
                // erased variables are charged at their pattern-component type
                std::size_t erased = 0;
                std::function<void(const PatternPtr&)> walk = [&](const PatternPtr& p) {
                    switch (p->kind) {
                        case PatKind::Var:
                            if (!fvb.count(p->name)) erased += workload_type(p->type);
                            return;
                        case PatKind::BangVar:
                        case PatKind::Unit: return;
                        default:
                            walk(p->a);
                            walk(p->b);
                    }
                };
                walk(t->pat);
                for (auto& [n, _] : binds) scope.erase(n);
                for (auto& [n, dt] : saved) scope[n] = dt;
                Res r;
                r.m = body.m + erased;
                r.ty = dnode(TypeKind::Arrow, k, pattern_dectype(t->pat), body.ty);
                r.deg = std::move(body.deg);
                for (auto& [n, _] : binds) r.deg.erase(n);
                return r;
            }
            case TermKind::App: {
                Res f = run(t->a);
                Res x = run(t->b);
                if (f.ty->kind != TypeKind::Arrow)
                    throw user_error(ErrCode::TypeMismatch,
                                     "quantitative check: head is not a function");
                if (!type_equal(erase(f.ty->a), erase(x.ty)))
                    throw user_error(ErrCode::TypeMismatch,
                                     "quantitative check: argument type mismatch in " + print_term(t));
                std::size_t k = f.ty->k;
                Res r;
                std::size_t km = k * x.m;
                if (x.m != 0 && km / x.m != k)
                    throw user_error(ErrCode::DegreeOverflow, "workload overflow");
                r.m = f.m + km;
                r.ty = f.ty->b;
                r.deg = std::move(f.deg);
                for (auto& [v, d] : x.deg) {
                    std::size_t scaled = pinned_in_scope(v) ? d : k * d;
                    if (scaled > kDegreeCap)
                        throw user_error(ErrCode::DegreeOverflow, "additive degree exceeds the cap");
                    auto it = r.deg.find(v);
                    r.deg[v] = it == r.deg.end() ? scaled : cap_add(it->second, scaled);
                }
                return r;
            }
            case TermKind::Pair: {
                Res a = run(t->a);
                Res b = run(t->b);
                Res r;
                r.m = a.m + b.m;
                r.ty = dnode(TypeKind::Tensor, 1, a.ty, b.ty);
                r.deg = std::move(a.deg);
                for (auto& [v, d] : b.deg) {
                    auto it = r.deg.find(v);
                    r.deg[v] = it == r.deg.end() ? d : cap_add(it->second, d);
                }
                return r;
            }
            case TermKind::WithPair: {
                Res a = run(t->a);
                Res b = run(t->b);
                Res r;
                r.m = a.m + b.m;
                r.ty = dnode(TypeKind::With, 1, a.ty, b.ty);
                // pointwise addition over the variables present in either branch
                for (auto& [v, d] : a.deg) r.deg[v] = d;
                for (auto& [v, d] : b.deg) {
                    auto it = r.deg.find(v);
                    r.deg[v] = it == r.deg.end() ? d : cap_add(it->second, d);
                }
                return r;
            }
        }
        throw internal_error("qcheck fell through");
    }

    bool pinned_in_scope(const std::string& v) const {
        auto it = scope.find(v);
        if (it == scope.end()) return true;
        return degree_pinned(erase(it->second));
    }

    DecTypePtr pattern_dectype(const PatternPtr& p) {
        switch (p->kind) {
            case PatKind::Var: return decorate(p->type);
            case PatKind::BangVar: return decorate(p->type);
            case PatKind::Unit: return decorate(ty::unit());
            case PatKind::Tensor:
                return dnode(TypeKind::Tensor, 1, pattern_dectype(p->a), pattern_dectype(p->b));
            case PatKind::With:
                return dnode(TypeKind::With, 1, pattern_dectype(p->a), pattern_dectype(p->b));
        }
        throw internal_error("pattern_dectype");
    }
};

}  // namespace

QResult qcheck(const Decoration& d, const TermPtr& t) {
    QChecker ck;
    for (auto& e : d) {
        std::vector<std::pair<std::string, TypePtr>> binds;
        pattern_bindings(e.pattern, binds);
        // decorated entry types bind their variables at the matching piece
        std::vector<std::pair<std::string, TypePtr>> flat;
        pattern_bindings(e.pattern, flat);
        for (auto& [n, bt] : flat) ck.scope[n] = decorate(bt);
    }
    auto res = ck.run(t);
    QResult out;
    out.m = res.m;
    out.type = res.ty;
    out.degrees = ck.binder_degrees;
    for (auto& [v, deg] : res.deg)
        if (!out.degrees.count(v)) out.degrees[v] = deg;
    out.quant_safe = ck.quant_safe;
    out.violations = ck.violations;
    return out;
}

QReductionReport qsubject_reduction_check(const TermPtr& t, const Decoration& d) {
    QReductionReport rep;
    TermPtr cur = t;
    QResult q0 = qcheck(d, cur);
    rep.quant_safe = q0.quant_safe;
    rep.ms.push_back({q0.m, false});
    std::size_t prev = q0.m;
    for (std::size_t i = 0; i < 1000000; i++) {
        auto st = step_safe(cur);
        if (!st) break;
        cur = st->first;
        bool numeric = is_numeric_step(st->second.kind);
        if (numeric) rep.numeric_steps++;
        QResult q = qcheck(d, cur);
        rep.ms.push_back({q.m, numeric});
        if (q.m > prev || (numeric && q.m >= prev)) rep.monotone = false;
        prev = q.m;
    }
    rep.bound_holds = rep.numeric_steps <= q0.m;
    return rep;
}

}  // namespace llad
