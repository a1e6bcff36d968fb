#include "llad/seq.hpp"

#include <functional>

#include "llad/syntax.hpp"

namespace llad {

TypePtr with_seq_type(const std::vector<TypePtr>& types) {
    if (types.empty()) return ty::top();
    TypePtr out = types.back();
    for (size_t i = types.size() - 1; i-- > 0;) out = ty::with(types[i], out);
    return out;
}

TermPtr nary_with_term(const std::vector<TermPtr>& terms) {
    if (terms.empty()) return mk::top();
    TermPtr out = terms.back();
    for (size_t i = terms.size() - 1; i-- > 0;) out = mk::withpair(terms[i], out);
    return out;
}

PatternPtr nary_with_pattern(const std::vector<std::pair<std::string, TypePtr>>& vars,
                             FreshSupply& supply) {
    if (vars.empty()) return pat::var(supply.fresh("t"), ty::top());
    PatternPtr out = pat::var(vars.back().first, vars.back().second);
    for (size_t i = vars.size() - 1; i-- > 0;)
        out = pat::with(pat::var(vars[i].first, vars[i].second), out);
    return out;
}

PatternPtr fresh_with_pattern(const TypePtr& h, FreshSupply& supply) {
    if (h->kind == TypeKind::With)
        return pat::with(fresh_with_pattern(h->a, supply), fresh_with_pattern(h->b, supply));
    return pat::var(supply.fresh("q"), h);
}

TermPtr pattern_as_term(const PatternPtr& p) {
    switch (p->kind) {
        case PatKind::Var: return mk::var(p->name);
        case PatKind::BangVar: return mk::bang(mk::var(p->name));
        case PatKind::Unit: return mk::unit();
        case PatKind::Tensor: return mk::pair(pattern_as_term(p->a), pattern_as_term(p->b));
        case PatKind::With: return mk::withpair(pattern_as_term(p->a), pattern_as_term(p->b));
    }
    throw internal_error("pattern_as_term");
}

namespace {

struct SplitParts {
    PatternPtr full;                       // binder over all components
    std::vector<TermPtr> sel, rest;        // variables, in position order
    std::vector<TypePtr> sel_ty, rest_ty;
};

SplitParts make_parts(const std::vector<TypePtr>& types, const std::vector<int>& idx,
                      FreshSupply& s) {
    std::vector<bool> in(types.size(), false);
    for (int i : idx) in[size_t(i)] = true;
    SplitParts p;
    std::vector<std::pair<std::string, TypePtr>> vars;
    for (size_t i = 0; i < types.size(); i++) {
        std::string x = s.fresh("s");
        vars.emplace_back(x, types[i]);
        if (in[i]) {
            p.sel.push_back(mk::var(x));
            p.sel_ty.push_back(types[i]);
        } else {
            p.rest.push_back(mk::var(x));
            p.rest_ty.push_back(types[i]);
        }
    }
    p.full = nary_with_pattern(vars, s);
    return p;
}

bool is_identity_split(size_t n, const std::vector<int>& idx) {
    return n >= 2 && idx.size() == 1 && idx[0] == 0;
}

}  // namespace

TermPtr split_term(const std::vector<TypePtr>& types, const std::vector<int>& idx, FreshSupply& s) {
    SplitParts p = make_parts(types, idx, s);
    return mk::lam(p.full, mk::withpair(nary_with_term(p.sel), nary_with_term(p.rest)));
}

TermPtr fuse_term(const std::vector<TypePtr>& types, const std::vector<int>& idx, FreshSupply& s) {
    std::vector<bool> in(types.size(), false);
    for (int i : idx) in[size_t(i)] = true;
    std::vector<std::pair<std::string, TypePtr>> selv, restv;
    std::vector<TermPtr> all;
    std::vector<std::string> names(types.size());
    for (size_t i = 0; i < types.size(); i++) {
        names[i] = s.fresh("s");
        (in[i] ? selv : restv).emplace_back(names[i], types[i]);
        all.push_back(mk::var(names[i]));
    }
    PatternPtr pattern = pat::with(nary_with_pattern(selv, s), nary_with_pattern(restv, s));
    return mk::lam(pattern, nary_with_term(all));
}

TermPtr apply_split(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                    FreshSupply& s) {
    if (is_identity_split(types.size(), idx)) return arg;
    return mk::app(split_term(types, idx, s), std::move(arg));
}

TermPtr apply_fuse(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                   FreshSupply& s) {
    if (is_identity_split(types.size(), idx)) return arg;
    return mk::app(fuse_term(types, idx, s), std::move(arg));
}

TermPtr apply_select(const std::vector<TypePtr>& types, const std::vector<int>& idx, TermPtr arg,
                     FreshSupply& s) {
    if (idx.size() == types.size()) return arg;  // selecting everything
    SplitParts p = make_parts(types, idx, s);
    return mk::app(mk::lam(p.full, nary_with_term(p.sel)), std::move(arg));
}

TermPtr zero_term(const TypePtr& h) {
    switch (h->kind) {
        case TypeKind::Real: return mk::num(0.0);
        case TypeKind::Top: return mk::top();
        case TypeKind::With: return mk::withpair(zero_term(h->a), zero_term(h->b));
        default:
            throw user_error(ErrCode::TypeMismatch, "zero is defined at &-sequence types only");
    }
}

TermPtr plus_term(const TypePtr& h, FreshSupply& s) {
    if (h->kind == TypeKind::Real) return mk::dotplus();
    if (h->kind == TypeKind::Top) {
        std::string u = s.fresh("u");
        return mk::lam(pat::var(u, ty::with(ty::top(), ty::top())), mk::top());
    }
    if (h->kind != TypeKind::With)
        throw user_error(ErrCode::TypeMismatch, "sum is defined at &-sequence types only");
    PatternPtr pa = fresh_with_pattern(h, s);
    PatternPtr pb = fresh_with_pattern(h, s);
    // componentwise sums; both components of the argument pair are projected
    // inside each additive branch
    std::function<TermPtr(const TypePtr&, const PatternPtr&, const PatternPtr&)> go =
        [&](const TypePtr& t, const PatternPtr& a, const PatternPtr& b) -> TermPtr {
        if (t->kind == TypeKind::With)
            return mk::withpair(go(t->a, a->a, b->a), go(t->b, a->b, b->b));
        if (t->kind == TypeKind::Top) return mk::top();
        return mk::add(pattern_as_term(a), pattern_as_term(b));
    };
    return mk::lam(pat::with(pa, pb), go(h, pa, pb));
}

TermPtr times_term(const TypePtr& h, FreshSupply& s) {
    if (h->kind == TypeKind::Real) return mk::dottimes();
    std::string x = s.fresh("x");
    if (h->kind == TypeKind::Top) {
        std::string u = s.fresh("u");
        return mk::lam(pat::var(x, ty::real()),
                       mk::lam(pat::var(u, ty::top()), mk::top()));
    }
    if (h->kind != TypeKind::With)
        throw user_error(ErrCode::TypeMismatch, "scaling is defined at &-sequence types only");
    PatternPtr p = fresh_with_pattern(h, s);
    std::function<TermPtr(const TypePtr&, const PatternPtr&)> go =
        [&](const TypePtr& t, const PatternPtr& q) -> TermPtr {
        if (t->kind == TypeKind::With) return mk::withpair(go(t->a, q->a), go(t->b, q->b));
        if (t->kind == TypeKind::Top) return mk::top();
        return mk::scale(mk::var(x), pattern_as_term(q));
    };
    return mk::lam(pat::var(x, ty::real()), mk::lam(p, go(h, p)));
}

TermPtr apply_plus(const TypePtr& h, TermPtr a, TermPtr b, FreshSupply& s) {
    if (h->kind == TypeKind::Real) return mk::add(std::move(a), std::move(b));
    return mk::app(plus_term(h, s), mk::withpair(std::move(a), std::move(b)));
}

TermPtr apply_times(const TypePtr& h, TermPtr scalar, TermPtr v, FreshSupply& s) {
    // inlined componentwise so images stay inside the sorted fragment;
    // the scalar is shared additively across the branches
    if (h->kind == TypeKind::Real) return mk::scale(std::move(scalar), std::move(v));
    if (h->kind == TypeKind::Top)
        return mk::app(mk::lam(pat::var(s.fresh("t"), ty::top()), mk::top()), std::move(v));
    PatternPtr p = fresh_with_pattern(h, s);
    std::function<TermPtr(const TypePtr&, const PatternPtr&)> go =
        [&](const TypePtr& t, const PatternPtr& q) -> TermPtr {
        if (t->kind == TypeKind::With) return mk::withpair(go(t->a, q->a), go(t->b, q->b));
        if (t->kind == TypeKind::Top) return mk::top();
        return mk::scale(scalar, pattern_as_term(q));
    };
    return mk::app(mk::lam(p, go(h, p)), std::move(v));
}

std::vector<TermPtr> basis_terms(const TypePtr& h) {
    switch (h->kind) {
        case TypeKind::Real: return {mk::num(1.0)};
        case TypeKind::Top: return {mk::top()};
        case TypeKind::With: {
            std::vector<TermPtr> out;
            for (auto& v : basis_terms(h->a)) out.push_back(mk::withpair(v, zero_term(h->b)));
            for (auto& v : basis_terms(h->b)) out.push_back(mk::withpair(zero_term(h->a), v));
            return out;
        }
        default:
            throw user_error(ErrCode::TypeMismatch, "basis is defined at &-sequence types only");
    }
}

TermPtr inner_product_term(const TypePtr& h, FreshSupply& s) {
    // I_H : H * H -o R
    PatternPtr pa = fresh_with_pattern(h, s);
    PatternPtr pb = fresh_with_pattern(h, s);
    std::function<TermPtr(const TypePtr&, const PatternPtr&, const PatternPtr&)> go =
        [&](const TypePtr& t, const PatternPtr& a, const PatternPtr& b) -> TermPtr {
        if (t->kind == TypeKind::Real) return mk::scale(pattern_as_term(a), pattern_as_term(b));
        if (t->kind == TypeKind::Top) return mk::num(0.0);
        return mk::add(go(t->a, a->a, b->a), go(t->b, a->b, b->b));
    };
    if (h->kind == TypeKind::Real || h->kind == TypeKind::Top) {
        std::string xa = s.fresh("h"), xb = s.fresh("h");
        TermPtr body = h->kind == TypeKind::Real
                           ? mk::scale(mk::var(xa), mk::var(xb))
                           : mk::num(0.0);
        return mk::lam(pat::tensor(pat::var(xa, h), pat::var(xb, h)), body);
    }
    return mk::lam(pat::tensor(pa, pb), go(h, pa, pb));
}

TermPtr dual_term(const TypePtr& h, FreshSupply& s) {
    // dual_H = lam h . lam h' . I_H (h, h')
    std::string a = s.fresh("h"), b = s.fresh("h");
    return mk::lam(pat::var(a, h),
                   mk::lam(pat::var(b, h),
                           mk::app(inner_product_term(h, s), mk::pair(mk::var(a), mk::var(b)))));
}

TermPtr dual_bar_term(const TypePtr& h, FreshSupply& s) {
    // dual_bar_H = lam f . sum over the basis of (f V) *_H V
    std::string f = s.fresh("f");
    std::vector<TermPtr> parts;
    for (auto& v : basis_terms(h))
        parts.push_back(apply_times(h, mk::app(mk::var(f), v), v, s));
    TermPtr body;
    if (parts.empty()) {
        body = zero_term(h);
    } else {
        body = parts.back();
        for (size_t i = parts.size() - 1; i-- > 0;) body = apply_plus(h, parts[i], body, s);
    }
    return mk::lam(pat::var(f, ty::arrow(h, ty::real())), body);
}

}  // namespace llad
