#include "llad/typecheck.hpp"

#include <algorithm>

#include "llad/syntax.hpp"
#include "json.hpp"

namespace llad {

namespace {

[[noreturn]] void err(ErrCode c, const std::string& msg) { throw user_error(c, msg); }

bool pat_is_bang(const PatternPtr& p) { return p->kind == PatKind::BangVar; }

// An unused entry can be discharged iff weakening reaches it: !w for bang
// patterns, 1e for unit patterns, &e projection into a dischargeable side,
// and tensor elimination into two dischargeable components.
bool weakenable(const PatternPtr& p) {
    switch (p->kind) {
        case PatKind::BangVar:
        case PatKind::Unit: return true;
        case PatKind::Var: return false;
        case PatKind::With: return weakenable(p->a) || weakenable(p->b);
        case PatKind::Tensor: return weakenable(p->a) && weakenable(p->b);
    }
    return false;
}

// Whether a term can absorb arbitrary extra environment entries, i.e. every
// leaf it routes them to is a <> or 0 axiom (both hold under any environment).
bool absorbs(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Top: return true;
        case TermKind::Num: return t->value == 0.0;
        case TermKind::WithPair: return absorbs(t->a) && absorbs(t->b);
        case TermKind::Lam: return absorbs(t->a);
        case TermKind::App:
        case TermKind::Pair: return absorbs(t->a) || absorbs(t->b);
        default: return false;
    }
}

struct Checker {
    Derivation* deriv_sink = nullptr;

    struct Res {
        TypePtr type;
        Derivation d;
    };

    static std::string env_str(const std::vector<EnvEntry>& es) {
        std::string s;
        for (size_t i = 0; i < es.size(); i++) {
            if (i) s += ", ";
            s += print_pattern(es[i].pattern);
        }
        return s;
    }

    Derivation node(const std::string& rule, const std::vector<EnvEntry>& env, const TermPtr& t,
                    const TypePtr& ty, std::vector<Derivation> kids = {}) {
        return Derivation{rule, env_str(env), print_term(t), print_type(ty), std::move(kids)};
    }

    // Entries the pattern's variables intersect with a free-variable set.
    static bool touches(const PatternPtr& p, const std::unordered_set<std::string>& fv) {
        for (auto& v : pattern_vars(p))
            if (fv.count(v)) return true;
        return false;
    }

    void discharge(std::vector<EnvEntry>& unused, const TermPtr& at) {
        for (auto& e : unused)
            if (!weakenable(e.pattern))
                err(ErrCode::LinearityViolation,
                    "linear entry '" + print_pattern(e.pattern) + "' is unused in " + print_term(at));
    }

    // Splits an environment across a multiplicative node: bang entries are
    // shared, linear entries go to the unique side that uses them.
    void split(const std::vector<EnvEntry>& env, const TermPtr& whole, const TermPtr& m,
               const TermPtr& n, std::vector<EnvEntry>& em, std::vector<EnvEntry>& en) {
        auto fvm = free_vars(m);
        auto fvn = free_vars(n);
        std::vector<EnvEntry> leftovers;
        for (auto& e : env) {
            if (pat_is_bang(e.pattern)) {
                em.push_back(e);
                en.push_back(e);
                continue;
            }
            bool um = touches(e.pattern, fvm);
            bool un = touches(e.pattern, fvn);
            if (um && un) {
                bool bang_typed = e.pattern->kind == PatKind::Var && e.type->kind == TypeKind::Bang;
                err(bang_typed ? ErrCode::NonExponentialDuplication : ErrCode::LinearityViolation,
                    "variable(s) of '" + print_pattern(e.pattern) +
                        "' used on both sides of the multiplicative split in " + print_term(whole));
            } else if (um) {
                em.push_back(e);
            } else if (un) {
                en.push_back(e);
            } else if (weakenable(e.pattern)) {
                // dropped here; recorded by the caller as implicit weakening
            } else if (absorbs(m)) {
                em.push_back(e);
            } else if (absorbs(n)) {
                en.push_back(e);
            } else {
                err(ErrCode::LinearityViolation,
                    "linear entry '" + print_pattern(e.pattern) + "' is unused in " + print_term(whole));
            }
        }
    }

    // Resolves a variable leaf: finds the entry binding x, projects additive
    // patterns toward x, eliminates tensors on the way and requires the
    // discarded siblings to be weakenable.
    TypePtr resolve_var(const std::vector<EnvEntry>& env, const std::string& x, const TermPtr& at,
                        std::string& rule) {
        int found = -1;
        for (size_t i = 0; i < env.size(); i++)
            if (touches(env[i].pattern, {x})) { found = int(i); break; }
        if (found < 0) err(ErrCode::UnboundVar, "unbound variable '" + x + "' in " + print_term(at));
        for (size_t i = 0; i < env.size(); i++) {
            if (int(i) == found) continue;
            if (!weakenable(env[i].pattern))
                err(ErrCode::LinearityViolation,
                    "linear entry '" + print_pattern(env[i].pattern) + "' is unused at variable " + x);
        }
        PatternPtr p = env[size_t(found)].pattern;
        for (;;) {
            switch (p->kind) {
                case PatKind::Var:
                    rule = "v";
                    return p->type;
                case PatKind::BangVar:
                    rule = "!e";
                    return p->type->kind == TypeKind::Bang ? p->type->a : p->type;
                case PatKind::With: {
                    bool la = touches(p->a, {x});
                    p = la ? p->a : p->b;
                    break;
                }
                case PatKind::Tensor: {
                    // tensor elimination splits the entry; the component not
                    // containing x must be weakenable
                    bool la = touches(p->a, {x});
                    const PatternPtr& other = la ? p->b : p->a;
                    if (!weakenable(other))
                        err(ErrCode::LinearityViolation,
                            "tensor component '" + print_pattern(other) + "' is unused at variable " + x);
                    p = la ? p->a : p->b;
                    break;
                }
                case PatKind::Unit:
                    err(ErrCode::UnboundVar, "variable '" + x + "' vanished in pattern");
            }
        }
    }

    Res run(const std::vector<EnvEntry>& env, const TermPtr& t) {
        switch (t->kind) {
            case TermKind::Var: {
                std::string rule;
                TypePtr ty = resolve_var(env, t->name, t, rule);
                return {ty, node(rule, env, t, ty)};
            }
            case TermKind::Num: {
                TypePtr r = ty::real();
                if (t->value == 0.0) return {r, node("Z", env, t, r)};
                std::vector<EnvEntry> extra = env;
                discharge(extra, t);
                return {r, node("R", env, t, r)};
            }
            case TermKind::Top: return {ty::top(), node("T", env, t, ty::top())};
            case TermKind::Unit: {
                std::vector<EnvEntry> extra = env;
                discharge(extra, t);
                return {ty::unit(), node("1i", env, t, ty::unit())};
            }
            case TermKind::Fun: {
                std::vector<EnvEntry> extra = env;
                discharge(extra, t);
                TypePtr ty = fun_type(t->name);
                return {ty, node(fun_info(t->name).arity == 1 ? "F1" : "F2", env, t, ty)};
            }
            case TermKind::DotPlus: {
                std::vector<EnvEntry> extra = env;
                discharge(extra, t);
                TypePtr ty = ty::arrow(ty::with(ty::real(), ty::real()), ty::real());
                return {ty, node("S", env, t, ty)};
            }
            case TermKind::DotTimes: {
                std::vector<EnvEntry> extra = env;
                discharge(extra, t);
                TypePtr ty = ty::arrow(ty::real(), ty::arrow(ty::real(), ty::real()));
                return {ty, node("M", env, t, ty)};
            }
            case TermKind::Lam: {
                if (!pattern_linear(t->pat))
                    err(ErrCode::IllTyped, "pattern binds a variable twice: " + print_pattern(t->pat));
                std::vector<EnvEntry> inner = env;
                push_entry(inner, t->pat);
                Res body = run(inner, t->a);
                TypePtr ty = ty::arrow(pattern_type(t->pat), body.type);
                return {ty, node("-oi", env, t, ty, {std::move(body.d)})};
            }
            case TermKind::App: {
                std::vector<EnvEntry> em, en;
                split(env, t, t->a, t->b, em, en);
                Res f = run(em, t->a);
                if (f.type->kind != TypeKind::Arrow)
                    err(ErrCode::TypeMismatch, "application head is not a function: " + print_term(t->a));
                Res x = run(en, t->b);
                if (!type_equal(f.type->a, x.type))
                    err(ErrCode::TypeMismatch, "argument type " + print_type(x.type) +
                                                   " does not match " + print_type(f.type->a) +
                                                   " in " + print_term(t));
                TypePtr ty = f.type->b;
                return {ty, node("-oe", env, t, ty, {std::move(f.d), std::move(x.d)})};
            }
            case TermKind::Pair: {
                std::vector<EnvEntry> em, en;
                split(env, t, t->a, t->b, em, en);
                Res a = run(em, t->a);
                Res b = run(en, t->b);
                TypePtr ty = ty::tensor(a.type, b.type);
                return {ty, node("*i", env, t, ty, {std::move(a.d), std::move(b.d)})};
            }
            case TermKind::WithPair: {
                Res a = run(env, t->a);
                Res b = run(env, t->b);
                TypePtr ty = ty::with(a.type, b.type);
                return {ty, node("&i", env, t, ty, {std::move(a.d), std::move(b.d)})};
            }
            case TermKind::Bang: {
                auto fv = free_vars(t->a);
                std::vector<EnvEntry> inner;
                for (auto& e : env) {
                    if (touches(e.pattern, fv)) {
                        if (!pat_is_bang(e.pattern))
                            err(ErrCode::IllTyped, "non-exponential entry '" + print_pattern(e.pattern) +
                                                       "' used under ! in " + print_term(t));
                        inner.push_back(e);
                    } else if (!weakenable(e.pattern)) {
                        err(ErrCode::LinearityViolation,
                            "linear entry '" + print_pattern(e.pattern) + "' is unused in " + print_term(t));
                    }
                }
                Res a = run(inner, t->a);
                TypePtr ty = ty::bang(a.type);
                return {ty, node("!i", env, t, ty, {std::move(a.d)})};
            }
        }
        throw internal_error("checker fell through");
    }

    static void push_entry(std::vector<EnvEntry>& env, const PatternPtr& p) {
        switch (p->kind) {
            case PatKind::Unit: return;  // 1e applied eagerly
            case PatKind::Tensor:        // *e applied eagerly
                push_entry(env, p->a);
                push_entry(env, p->b);
                return;
            case PatKind::BangVar:
                if (p->type->kind != TypeKind::Bang)
                    err(ErrCode::IllTyped, "!-pattern with non-!-type: " + print_pattern(p));
                [[fallthrough]];
            default: env.push_back({p, pattern_type(p)});
        }
    }
};

void check_env_wf(const TypingEnv& env) {
    std::unordered_set<std::string> seen;
    for (auto& e : env.entries())
        for (auto& v : pattern_vars(e.pattern))
            if (!seen.insert(v).second)
                err(ErrCode::IllTyped, "environment binds variable '" + v + "' twice");
}

bool binders_collide(const TermPtr& t, std::unordered_set<std::string>& seen) {
    switch (t->kind) {
        case TermKind::Lam: {
            for (auto& v : pattern_vars(t->pat))
                if (!seen.insert(v).second) return true;
            return binders_collide(t->a, seen);
        }
        case TermKind::Bang: return binders_collide(t->a, seen);
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair:
            return binders_collide(t->a, seen) || binders_collide(t->b, seen);
        default: return false;
    }
}

}  // namespace

TypingEnv TypingEnv::of(std::vector<EnvEntry> entries) {
    TypingEnv env;
    for (auto& e : entries) env.push(e.pattern);
    return env;
}

void TypingEnv::push(const PatternPtr& p) {
    Checker::push_entry(entries_, p);
}

void TypingEnv::push(const PatternPtr& p, const TypePtr& t) {
    if (!type_equal(pattern_type(p), t))
        throw user_error(ErrCode::TypeMismatch, "entry type does not match pattern annotation");
    push(p);
}

std::vector<EnvEntry> TypingEnv::bang_part() const {
    std::vector<EnvEntry> out;
    for (auto& e : entries_)
        if (e.pattern->kind == PatKind::BangVar) out.push_back(e);
    return out;
}

std::vector<EnvEntry> TypingEnv::linear_part() const {
    std::vector<EnvEntry> out;
    for (auto& e : entries_)
        if (e.pattern->kind != PatKind::BangVar) out.push_back(e);
    return out;
}

std::string TypingEnv::to_string() const {
    std::string s;
    for (size_t i = 0; i < entries_.size(); i++) {
        if (i) s += ", ";
        s += print_pattern(entries_[i].pattern);
    }
    return s;
}

Judgment synth(const TypingEnv& env, const TermPtr& t) {
    check_env_wf(env);
    // Internal alpha-renaming keeps shadowed binders out of the entry list;
    // derivability is invariant under it. Only applied when names collide.
    std::unordered_set<std::string> seen;
    for (auto& e : env.entries())
        for (auto& v : pattern_vars(e.pattern)) seen.insert(v);
    TermPtr tu = t;
    if (binders_collide(t, seen)) {
        FreshSupply supply("v");
        supply.avoid_all_in(t);
        for (auto& e : env.entries())
            for (auto& v : pattern_vars(e.pattern)) supply.avoid(v);
        tu = alpha_unique(t, supply);
    }
    Checker ck;
    auto res = ck.run(env.entries(), tu);
    return Judgment{env, t, res.type, std::move(res.d)};
}

Judgment check(const TypingEnv& env, const TermPtr& t, const TypePtr& expected) {
    Judgment j = synth(env, t);
    if (!type_equal(j.type, expected))
        throw user_error(ErrCode::TypeMismatch, "term has type " + print_type(j.type) +
                                                    ", expected " + print_type(expected));
    return j;
}

Judgment check_additive_sharing(const TypingEnv& env, const TermPtr& t, const TypePtr& expected) {
    if (t->kind != TermKind::WithPair || expected->kind != TypeKind::With)
        throw user_error(ErrCode::TypeMismatch, "additive sharing expects <M, N> against A & B");
    return check(env, t, expected);
}

Judgment check_affine(const TypingEnv& env, const TermPtr& t, const TypePtr& a) {
    return check(env, t, ty::sect(a));
}

namespace {
nlohmann::json deriv_json(const Derivation& d) {
    nlohmann::json j;
    j["rule"] = d.rule;
    j["env"] = d.env;
    j["subject"] = d.subject;
    j["type"] = d.type;
    j["children"] = nlohmann::json::array();
    for (auto& c : d.children) j["children"].push_back(deriv_json(c));
    return j;
}
}  // namespace

std::string derivation_to_json(const Derivation& d) { return deriv_json(d).dump(); }

}  // namespace llad
