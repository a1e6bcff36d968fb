#include <functional>
#include <set>

#include "llad/linear_a.hpp"

namespace llad::lina {

namespace {

[[noreturn]] void err(ErrCode c, const std::string& msg) { throw user_error(c, msg); }

// Inference types: JaxType plus metavariables, resolved by union-find.
struct ITy;
using ITyPtr = std::shared_ptr<ITy>;
struct ITy {
    int kind;  // 0 R, 1 One, 2 Tensor, 3 Meta
    int meta = -1;
    ITyPtr a, b;
};

ITyPtr it_real() { return std::make_shared<ITy>(ITy{0, -1, nullptr, nullptr}); }
ITyPtr it_one() { return std::make_shared<ITy>(ITy{1, -1, nullptr, nullptr}); }
ITyPtr it_tensor(ITyPtr a, ITyPtr b) {
    return std::make_shared<ITy>(ITy{2, -1, std::move(a), std::move(b)});
}

struct Inference {
    std::vector<ITyPtr> meta_binding;  // meta id -> binding or null

    ITyPtr fresh_meta() {
        auto m = std::make_shared<ITy>(ITy{3, int(meta_binding.size()), nullptr, nullptr});
        meta_binding.push_back(nullptr);
        return m;
    }

    ITyPtr shorten(ITyPtr t) {
        while (t->kind == 3 && meta_binding[size_t(t->meta)]) t = meta_binding[size_t(t->meta)];
        return t;
    }

    void unify(ITyPtr a, ITyPtr b) {
        a = shorten(std::move(a));
        b = shorten(std::move(b));
        if (a == b) return;
        if (a->kind == 3) { meta_binding[size_t(a->meta)] = b; return; }
        if (b->kind == 3) { meta_binding[size_t(b->meta)] = a; return; }
        if (a->kind != b->kind)
            err(ErrCode::TypeMismatch, "cannot unify " + show(a) + " with " + show(b));
        if (a->kind == 2) {
            unify(a->a, b->a);
            unify(a->b, b->b);
        }
    }

    ITyPtr of(const JTPtr& t) {
        switch (t->kind) {
            case JKind::Real: return it_real();
            case JKind::One: return it_one();
            case JKind::Tensor: return it_tensor(of(t->a), of(t->b));
        }
        throw internal_error("Inference::of");
    }

    // Unresolved metas default to R.
    JTPtr resolve(ITyPtr t) {
        t = shorten(std::move(t));
        switch (t->kind) {
            case 0: return jt_real();
            case 1: return jt_one();
            case 2: return jt_tensor(resolve(t->a), resolve(t->b));
            default: return jt_real();
        }
    }

    std::string show(const ITyPtr& t0) {
        ITyPtr t = shorten(ITyPtr(t0));
        switch (t->kind) {
            case 0: return "R";
            case 1: return "1";
            case 2: return "(" + show(t->a) + " * " + show(t->b) + ")";
            default: return "?" + std::to_string(t->meta);
        }
    }
};

struct Use {
    std::set<std::string> tangents;
};

struct Checker {
    Inference inf;
    // Scopes: bound variables shadow; free variables get metas on first use.
    std::vector<std::pair<std::string, ITyPtr>> scope_p, scope_t;
    std::unordered_map<std::string, ITyPtr> free_p, free_t;
    std::vector<std::string> free_p_order, free_t_order;
    std::unordered_map<const LinExpr*, std::pair<ITyPtr, ITyPtr>> node_types;
    std::unordered_map<std::string, ITyPtr> seen_p, seen_t;  // every variable ever in scope

    ITyPtr lookup(bool tangent, const std::string& n) {
        auto& scope = tangent ? scope_t : scope_p;
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == n) return it->second;
        auto& frees = tangent ? free_t : free_p;
        auto it = frees.find(n);
        if (it != frees.end()) return it->second;
        if ((tangent ? free_p : free_t).count(n) || find_in(tangent ? scope_p : scope_t, n))
            err(ErrCode::SortError, "variable '" + n + "' used in both primal and tangent position");
        ITyPtr m = inf.fresh_meta();
        frees[n] = m;
        (tangent ? free_t_order : free_p_order).push_back(n);
        (tangent ? seen_t : seen_p)[n] = m;
        return m;
    }

    static bool find_in(const std::vector<std::pair<std::string, ITyPtr>>& scope,
                        const std::string& n) {
        for (auto& [k, _] : scope)
            if (k == n) return true;
        return false;
    }

    void push_p(const std::string& n, ITyPtr t) {
        seen_p[n] = t;
        scope_p.emplace_back(n, std::move(t));
    }
    void push_t(const std::string& n, ITyPtr t) {
        seen_t[n] = t;
        scope_t.emplace_back(n, std::move(t));
    }

    static void merge_disjoint(Use& into, const Use& other, const LinPtr& at) {
        for (auto& v : other.tangents)
            if (!into.tangents.insert(v).second)
                err(ErrCode::TangentLinearityViolation,
                    "tangent variable '" + v + "' used twice in " + print_lin(at));
    }

    void need_used(const Use& u, const std::string& v, const LinPtr& at) {
        if (!u.tangents.count(v))
            err(ErrCode::TangentLinearityViolation,
                "tangent variable '" + v + "' bound but unused in " + print_lin(at));
    }

    static void distinct(const std::string& a, const std::string& b, const LinPtr& at) {
        if (a == b)
            err(ErrCode::TangentLinearityViolation,
                "repeated variable '" + a + "' in " + print_lin(at));
    }

    struct Res {
        ITyPtr tau, sigma;
        Use use;
    };

    Res check(const LinPtr& e) {
        Res r = check_inner(e);
        node_types[e.get()] = {r.tau, r.sigma};
        return r;
    }

    Res check_inner(const LinPtr& e) {
        switch (e->kind) {
            case LKind::VarPair: {
                ITyPtr tx = lookup(false, e->x);
                ITyPtr ty = lookup(true, e->y);
                Use u;
                u.tangents.insert(e->y);
                return {tx, ty, u};
            }
            case LKind::LetPair: {
                Res r1 = check(e->a);
                push_p(e->x, r1.tau);
                push_t(e->y, r1.sigma);
                Res r2 = check(e->b);
                scope_p.pop_back();
                scope_t.pop_back();
                need_used(r2.use, e->y, e);
                r2.use.tangents.erase(e->y);
                merge_disjoint(r2.use, r1.use, e);
                return {r2.tau, r2.sigma, r2.use};
            }
            case LKind::TupP0: return {it_one(), it_one(), {}};
            case LKind::TupP2: {
                if (e->x == e->y)
                    err(ErrCode::SortError, "repeated variable in " + print_lin(e));
                ITyPtr a = lookup(false, e->x), b = lookup(false, e->y);
                return {it_tensor(a, b), it_one(), {}};
            }
            case LKind::LetTupP0: {
                inf.unify(lookup(false, e->z), it_one());
                return check(e->a);
            }
            case LKind::LetTupP2: {
                ITyPtr m1 = inf.fresh_meta(), m2 = inf.fresh_meta();
                inf.unify(lookup(false, e->z), it_tensor(m1, m2));
                push_p(e->x, m1);
                push_p(e->y, m2);
                Res r = check(e->a);
                scope_p.pop_back();
                scope_p.pop_back();
                return r;
            }
            case LKind::TupT0: return {it_one(), it_one(), {}};
            case LKind::TupT2: {
                distinct(e->x, e->y, e);
                ITyPtr a = lookup(true, e->x), b = lookup(true, e->y);
                Use u;
                u.tangents = {e->x, e->y};
                return {it_one(), it_tensor(a, b), u};
            }
            case LKind::LetTupT0: {
                inf.unify(lookup(true, e->z), it_one());
                Res r = check(e->a);
                Use u;
                u.tangents.insert(e->z);
                merge_disjoint(u, r.use, e);
                return {r.tau, r.sigma, u};
            }
            case LKind::LetTupT2: {
                distinct(e->x, e->y, e);
                ITyPtr m1 = inf.fresh_meta(), m2 = inf.fresh_meta();
                inf.unify(lookup(true, e->z), it_tensor(m1, m2));
                push_t(e->x, m1);
                push_t(e->y, m2);
                Res r = check(e->a);
                scope_t.pop_back();
                scope_t.pop_back();
                need_used(r.use, e->x, e);
                need_used(r.use, e->y, e);
                r.use.tangents.erase(e->x);
                r.use.tangents.erase(e->y);
                Use u;
                u.tangents.insert(e->z);
                merge_disjoint(u, r.use, e);
                return {r.tau, r.sigma, u};
            }
            case LKind::Num: return {it_real(), it_one(), {}};
            case LKind::PrimApp: {
                if (!is_fun_symbol(e->fn))
                    err(ErrCode::UnboundVar, "unknown function symbol '" + e->fn + "'");
                if (int(e->args.size()) != fun_info(e->fn).arity)
                    err(ErrCode::TypeMismatch, "arity mismatch in " + print_lin(e));
                std::set<std::string> seen;
                for (auto& a : e->args) {
                    if (!seen.insert(a).second)
                        err(ErrCode::SortError, "repeated argument '" + a + "' in " + print_lin(e));
                    inf.unify(lookup(false, a), it_real());
                }
                return {it_real(), it_one(), {}};
            }
            case LKind::Zero: return {it_one(), inf.of(e->ty), {}};
            case LKind::Add: {
                distinct(e->x, e->y, e);
                ITyPtr a = lookup(true, e->x);
                inf.unify(a, lookup(true, e->y));
                Use u;
                u.tangents = {e->x, e->y};
                return {it_one(), a, u};
            }
            case LKind::Scale: {
                inf.unify(lookup(false, e->x), it_real());
                ITyPtr t = lookup(true, e->y);
                Use u;
                u.tangents = {e->y};
                return {it_one(), t, u};
            }
            case LKind::Dup: {
                ITyPtr t = lookup(true, e->y);
                Use u;
                u.tangents = {e->y};
                return {it_one(), it_tensor(t, t), u};
            }
            case LKind::Drop: {
                Res r = check(e->a);
                return {it_one(), it_one(), r.use};
            }
            case LKind::PrimVar: return {lookup(false, e->x), it_one(), {}};
            case LKind::TanVar: {
                Use u;
                u.tangents = {e->y};
                return {it_one(), lookup(true, e->y), u};
            }
            case LKind::LetPrim: {
                Res r1 = check(e->a);
                inf.unify(r1.sigma, it_one());
                push_p(e->x, r1.tau);
                Res r2 = check(e->b);
                scope_p.pop_back();
                merge_disjoint(r2.use, r1.use, e);
                return {r2.tau, r2.sigma, r2.use};
            }
            case LKind::LetTan: {
                Res r1 = check(e->a);
                inf.unify(r1.tau, it_one());
                push_t(e->y, r1.sigma);
                Res r2 = check(e->b);
                scope_t.pop_back();
                need_used(r2.use, e->y, e);
                r2.use.tangents.erase(e->y);
                merge_disjoint(r2.use, r1.use, e);
                return {r2.tau, r2.sigma, r2.use};
            }
            case LKind::PairE: {
                Res r1 = check(e->a);
                Res r2 = check(e->b);
                inf.unify(r1.sigma, it_one());
                inf.unify(r2.tau, it_one());
                merge_disjoint(r1.use, r2.use, e);
                return {r1.tau, r2.sigma, r1.use};
            }
            case LKind::TupPE: {
                Res r1 = check(e->a);
                Res r2 = check(e->b);
                inf.unify(r1.sigma, it_one());
                inf.unify(r2.sigma, it_one());
                merge_disjoint(r1.use, r2.use, e);
                return {it_tensor(r1.tau, r2.tau), it_one(), r1.use};
            }
            case LKind::TupTE: {
                Res r1 = check(e->a);
                Res r2 = check(e->b);
                inf.unify(r1.tau, it_one());
                inf.unify(r2.tau, it_one());
                merge_disjoint(r1.use, r2.use, e);
                return {it_one(), it_tensor(r1.sigma, r2.sigma), r1.use};
            }
        }
        throw internal_error("jax_check fell through");
    }
};

}  // namespace

LinTyping jax_infer(const LinPtr& e) {
    Checker ck;
    auto res = ck.check(e);
    LinTyping out;
    // free tangent variables must all be consumed exactly once
    for (auto& v : ck.free_t_order)
        if (!res.use.tangents.count(v))
            throw internal_error("tangent accounting lost variable " + v);
    for (auto& v : ck.free_p_order)
        out.judgment.primal_env.emplace_back(v, ck.inf.resolve(ck.free_p[v]));
    for (auto& v : ck.free_t_order)
        out.judgment.tangent_env.emplace_back(v, ck.inf.resolve(ck.free_t[v]));
    out.judgment.primal_type = ck.inf.resolve(res.tau);
    out.judgment.tangent_type = ck.inf.resolve(res.sigma);
    for (auto& [ptr, ts] : ck.node_types)
        out.node_types[ptr] = {ck.inf.resolve(ts.first), ck.inf.resolve(ts.second)};
    for (auto& [n, t] : ck.seen_p) out.primal_types[n] = ck.inf.resolve(t);
    for (auto& [n, t] : ck.seen_t) out.tangent_types[n] = ck.inf.resolve(t);
    return out;
}

JaxJudgment jax_check(const LinPtr& e) { return jax_infer(e).judgment; }

// ---------------------------------------------------------------- evaluation

namespace {

const NumSeq& env_get(const NumEnv& env, const std::string& n) {
    auto it = env.find(n);
    if (it == env.end())
        throw user_error(ErrCode::ShapeMismatch, "no value bound for variable '" + n + "'");
    return it->second;
}

void split_pair(const NumSeq& v, NumSeq& a, NumSeq& b) {
    if (v.kind != NumSeq::Kind::Pair)
        throw user_error(ErrCode::ShapeMismatch, "expected a tuple value");
    a = v.kids[0];
    b = v.kids[1];
}

}  // namespace

JaxValue jax_eval(const LinPtr& e, const NumEnv& primals, const NumEnv& tangents) {
    switch (e->kind) {
        case LKind::VarPair: return {env_get(primals, e->x), env_get(tangents, e->y)};
        case LKind::LetPair: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            NumEnv p2 = primals, t2 = tangents;
            p2[e->x] = v1.primal;
            t2[e->y] = v1.tangent;
            return jax_eval(e->b, p2, t2);
        }
        case LKind::TupP0:
        case LKind::TupT0: return {NumSeq::empty(), NumSeq::empty()};
        case LKind::TupP2:
            return {NumSeq::pair(env_get(primals, e->x), env_get(primals, e->y)), NumSeq::empty()};
        case LKind::TupT2:
            return {NumSeq::empty(), NumSeq::pair(env_get(tangents, e->x), env_get(tangents, e->y))};
        case LKind::LetTupP0: return jax_eval(e->a, primals, tangents);
        case LKind::LetTupP2: {
            NumSeq a, b;
            split_pair(env_get(primals, e->z), a, b);
            NumEnv p2 = primals;
            p2[e->x] = a;
            p2[e->y] = b;
            return jax_eval(e->a, p2, tangents);
        }
        case LKind::LetTupT0: return jax_eval(e->a, primals, tangents);
        case LKind::LetTupT2: {
            NumSeq a, b;
            split_pair(env_get(tangents, e->z), a, b);
            NumEnv t2 = tangents;
            t2[e->x] = a;
            t2[e->y] = b;
            return jax_eval(e->a, primals, t2);
        }
        case LKind::Num: return {NumSeq::scalar(e->value), NumSeq::empty()};
        case LKind::PrimApp: {
            std::vector<double> args;
            for (auto& a : e->args) {
                const NumSeq& v = env_get(primals, a);
                if (v.kind != NumSeq::Kind::Scalar)
                    throw user_error(ErrCode::ShapeMismatch, "function argument is not a scalar");
                args.push_back(v.value);
            }
            return {NumSeq::scalar(fun_eval(e->fn, args)), NumSeq::empty()};
        }
        case LKind::Zero: return {NumSeq::empty(), numseq_zero_of(e->ty)};
        case LKind::Add:
            return {NumSeq::empty(), numseq_add(env_get(tangents, e->x), env_get(tangents, e->y))};
        case LKind::Scale: {
            const NumSeq& s = env_get(primals, e->x);
            if (s.kind != NumSeq::Kind::Scalar)
                throw user_error(ErrCode::ShapeMismatch, "scaling factor is not a scalar");
            return {NumSeq::empty(), numseq_scale(s.value, env_get(tangents, e->y))};
        }
        case LKind::Dup: {
            const NumSeq& v = env_get(tangents, e->y);
            return {NumSeq::empty(), NumSeq::pair(v, v)};
        }
        case LKind::Drop: {
            jax_eval(e->a, primals, tangents);
            return {NumSeq::empty(), NumSeq::empty()};
        }
        case LKind::PrimVar: return {env_get(primals, e->x), NumSeq::empty()};
        case LKind::TanVar: return {NumSeq::empty(), env_get(tangents, e->y)};
        case LKind::LetPrim: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            NumEnv p2 = primals;
            p2[e->x] = v1.primal;
            return jax_eval(e->b, p2, tangents);
        }
        case LKind::LetTan: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            NumEnv t2 = tangents;
            t2[e->y] = v1.tangent;
            return jax_eval(e->b, primals, t2);
        }
        case LKind::PairE: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            JaxValue v2 = jax_eval(e->b, primals, tangents);
            return {v1.primal, v2.tangent};
        }
        case LKind::TupPE: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            JaxValue v2 = jax_eval(e->b, primals, tangents);
            return {NumSeq::pair(v1.primal, v2.primal), NumSeq::empty()};
        }
        case LKind::TupTE: {
            JaxValue v1 = jax_eval(e->a, primals, tangents);
            JaxValue v2 = jax_eval(e->b, primals, tangents);
            return {NumSeq::empty(), NumSeq::pair(v1.tangent, v2.tangent)};
        }
    }
    throw internal_error("jax_eval fell through");
}

// ------------------------------------------------------------------ workload

namespace {

std::size_t wl(const LinPtr& e, const LinTyping& ti) {
    auto sigma_of = [&](const LinPtr& n) { return ti.node_types.at(n.get()).second; };
    auto tau_of = [&](const LinPtr& n) { return ti.node_types.at(n.get()).first; };
    switch (e->kind) {
        case LKind::Num:
        case LKind::PrimApp: return 1;
        case LKind::Zero: return 1 + jax_workload_type(e->ty);
        case LKind::Add:
        case LKind::Scale: return jax_workload_type(sigma_of(e));
        case LKind::Dup: return 0;
        case LKind::Drop:
            return wl(e->a, ti) + jax_workload_type(tau_of(e->a)) + jax_workload_type(sigma_of(e->a));
        default: {
            std::size_t w = 0;
            if (e->a) w += wl(e->a, ti);
            if (e->b) w += wl(e->b, ti);
            return w;
        }
    }
}

}  // namespace

std::size_t jax_workload(const LinPtr& e) {
    LinTyping ti = jax_infer(e);
    return wl(e, ti);
}

}  // namespace llad::lina
