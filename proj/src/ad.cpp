#include "llad/ad.hpp"

#include <algorithm>
#include <functional>

#include "llad/seq.hpp"
#include "llad/syntax.hpp"
#include "llad/translate.hpp"

namespace llad {

namespace {

[[noreturn]] void err(ErrCode c, const std::string& msg) { throw user_error(c, msg); }

bool is_sect_pat(const PatternPtr& p) {
    return p->kind == PatKind::With && p->a->kind == PatKind::Unit && p->b->kind == PatKind::Var;
}
bool is_sect_term(const TermPtr& t) {
    return t->kind == TermKind::WithPair && t->a->kind == TermKind::Unit;
}

bool match_let(const TermPtr& t, PatternPtr& p, TermPtr& bound, TermPtr& body) {
    if (t->kind != TermKind::App || t->a->kind != TermKind::Lam) return false;
    p = t->a->pat;
    bound = t->b;
    body = t->a->a;
    return true;
}

std::string strip_hash(const std::string& n) {
    auto h = n.find('#');
    return h == std::string::npos ? n : n.substr(0, h);
}

}  // namespace

// ------------------------------------------------------- renamings, mu and nu

PatternPtr pattern_rename(const PatternPtr& p, const Renaming& a, FreshSupply& supply) {
    bool any = false;
    for (auto& v : pattern_vars(p))
        if (a.contains(v)) { any = true; break; }
    if (!any) return pat::var(supply.fresh("t"), ty::top());
    switch (p->kind) {
        case PatKind::Var: return pat::var(a.at(p->name), p->type);
        case PatKind::With: {
            bool la = false, rb = false;
            for (auto& v : pattern_vars(p->a))
                if (a.contains(v)) { la = true; break; }
            for (auto& v : pattern_vars(p->b))
                if (a.contains(v)) { rb = true; break; }
            if (la && rb) return pat::with(pattern_rename(p->a, a, supply), pattern_rename(p->b, a, supply));
            return pattern_rename(la ? p->a : p->b, a, supply);
        }
        default:
            err(ErrCode::TypeMismatch, "pattern renaming expects an additive pattern");
    }
}

TermPtr term_rename(const TermPtr& m, const Renaming& a) {
    TermPtr out = m;
    for (auto& [from, to] : a.map) out = subst_var(out, mk::var(to), from);
    return out;
}

TermPtr nu_term(const PatternPtr& p, const Renaming& a1, const Renaming& a2, FreshSupply& supply) {
    bool any = false;
    for (auto& v : pattern_vars(p))
        if (a1.contains(v) || a2.contains(v)) { any = true; break; }
    if (!any) return zero_term(pattern_type(p));
    switch (p->kind) {
        case PatKind::Var: {
            bool in1 = a1.contains(p->name), in2 = a2.contains(p->name);
            if (in1 && in2)
                return apply_plus(p->type, mk::var(a1.at(p->name)), mk::var(a2.at(p->name)), supply);
            return mk::var(in1 ? a1.at(p->name) : a2.at(p->name));
        }
        case PatKind::With:
            return mk::withpair(nu_term(p->a, a1, a2, supply), nu_term(p->b, a1, a2, supply));
        default:
            err(ErrCode::TypeMismatch, "nu expects an additive pattern");
    }
}

TermPtr mu_term(const PatternPtr& p, const Renaming& a1, const Renaming& a2, FreshSupply& supply) {
    for (auto& [_, c1] : a1.map)
        for (auto& [__, c2] : a2.map)
            if (c1 == c2)
                err(ErrCode::TypeMismatch, "mu needs renamings with disjoint codomains");
    PatternPtr p1 = pattern_rename(p, a1, supply);
    PatternPtr p2 = pattern_rename(p, a2, supply);
    return mk::lam(pat::with(p1, p2), nu_term(p, a1, a2, supply));
}

// --------------------------------------------------------------------- forward

namespace {

struct Fwd {
    FreshSupply& s;
    std::map<std::string, TypePtr> env;  // variable -> tensor-sequence type E

    static FwdTheta restrict_to(const FwdTheta& theta, const TermPtr& t) {
        auto fv = free_vars(t);
        FwdTheta out;
        for (auto& p : theta)
            if (fv.count(p.first)) out.push_back(p);
        return out;
    }

    std::vector<TypePtr> ttypes(const FwdTheta& theta) const {
        std::vector<TypePtr> out;
        for (auto& [n, e] : theta) out.push_back(trans_tangent_of_tensor_seq(e));
        return out;
    }

    TypePtr input_type(const FwdTheta& theta) const { return with_seq_type(ttypes(theta)); }

    // The tangent maps bind one pattern over all enumerated components and
    // assemble each consumer's tuple directly, so the glue performs no
    // numeric work and erases nothing that some branch still needs.
    struct Slots {
        PatternPtr pattern;                       // binder over &t(theta)
        std::map<std::string, TermPtr> component; // theta variable -> term
    };

    Slots make_slots(const FwdTheta& theta) {
        Slots sl;
        std::vector<PatternPtr> pats;
        for (auto& [n, e] : theta) {
            std::string c = s.fresh("u");
            sl.component[n] = mk::var(c);
            pats.push_back(pat::var(c, trans_tangent_of_tensor_seq(e)));
        }
        sl.pattern = collect(pats);
        return sl;
    }

    PatternPtr collect(const std::vector<PatternPtr>& pats) {
        if (pats.empty()) return pat::var(s.fresh("u"), ty::top());
        PatternPtr out = pats.back();
        for (size_t i = pats.size(); i-- > 1;) out = pat::with(pats[i - 1], out);
        return out;
    }

    static TermPtr tuple_for(const Slots& sl, const FwdTheta& sub) {
        std::vector<TermPtr> parts;
        for (auto& [n, _] : sub) parts.push_back(sl.component.at(n));
        return nary_with_term(parts);
    }

    // the tensor-sequence type of a primal-sort term (P : !E yields E)
    TypePtr ptype(const TermPtr& t) {
        switch (t->kind) {
            case TermKind::Bang: {
                const TermPtr& u = t->a;
                if (u->kind == TermKind::Var) return env.at(u->name);
                if (u->kind == TermKind::Num) return ty::real();
                if (u->kind == TermKind::Unit) return ty::unit();
                if (u->kind == TermKind::Pair)
                    return ty::tensor(ty::bang(ptype(u->a)), ty::bang(ptype(u->b)));
                break;
            }
            case TermKind::App: {
                if (t->a->kind == TermKind::Fun) return ty::real();
                PatternPtr p;
                TermPtr bound, body;
                if (match_let(t, p, bound, body)) {
                    Fwd inner = *this;
                    if (p->kind == PatKind::BangVar) {
                        inner.env[p->name] = ptype(bound);
                        return inner.ptype(body);
                    }
                    if (p->kind == PatKind::Unit) return inner.ptype(body);
                    if (p->kind == PatKind::Tensor && bound->kind == TermKind::Var) {
                        TypePtr ez = env.at(bound->name);
                        inner.env[p->a->name] = ez->a->a;
                        inner.env[p->b->name] = ez->b->a;
                        return inner.ptype(body);
                    }
                }
                break;
            }
            default: break;
        }
        err(ErrCode::NotPrimal, "not a primal-sort term: " + print_term(t));
    }

    TermPtr run(const TermPtr& t, const FwdTheta& theta0) {
        FwdTheta theta = restrict_to(theta0, t);
        switch (t->kind) {
            case TermKind::Bang: {
                const TermPtr& u = t->a;
                if (u->kind == TermKind::Var) {
                    std::string uv = s.fresh("u");
                    return mk::pair(t, mk::sect(mk::lam(
                                           pat::var(uv, trans_tangent_of_tensor_seq(env.at(u->name))),
                                           mk::var(uv))));
                }
                if (u->kind == TermKind::Num) {
                    std::string uv = s.fresh("u");
                    return mk::pair(t, mk::sect(mk::lam(pat::var(uv, ty::top()), mk::num(0.0))));
                }
                if (u->kind == TermKind::Unit) {
                    std::string uv = s.fresh("u");
                    return mk::pair(t, mk::sect(mk::lam(pat::var(uv, ty::top()), mk::top())));
                }
                if (u->kind == TermKind::Pair) return pair_case(u->a, u->b, theta);
                break;
            }
            case TermKind::App: {
                if (t->a->kind == TermKind::Fun) return fun_case(t, theta);
                PatternPtr p;
                TermPtr bound, body;
                if (match_let(t, p, bound, body)) {
                    if (p->kind == PatKind::BangVar) return let_case(p, bound, body, theta);
                    if (p->kind == PatKind::Unit)
                        return mk::let_(pat::unit(), bound, run(body, theta));
                    if (p->kind == PatKind::Tensor && bound->kind == TermKind::Var)
                        return tensor_case(p, bound->name, body, theta);
                }
                break;
            }
            default: break;
        }
        err(ErrCode::NotPrimal, "forward needs a primal-sort term: " + print_term(t));
    }

    // F(!(P,Q)): both blocks read their components off the shared binder.
    TermPtr pair_case(const TermPtr& p, const TermPtr& q, const FwdTheta& theta) {
        FwdTheta thp = restrict_to(theta, p), thq = restrict_to(theta, q);
        std::string xp = s.fresh("x"), xq = s.fresh("x"), f = s.fresh("f"), g = s.fresh("g");
        TypePtr ep = ptype(p), eq = ptype(q);
        TypePtr fin = input_type(thp), fout = trans_tangent_of_tensor_seq(ep);
        TypePtr gin = input_type(thq), gout = trans_tangent_of_tensor_seq(eq);
        Slots sl = make_slots(theta);
        TermPtr body = mk::withpair(mk::app(mk::var(f), tuple_for(sl, thp)),
                                    mk::app(mk::var(g), tuple_for(sl, thq)));
        TermPtr tangent = mk::lam(sl.pattern, body);
        return mk::let_(
            pat::tensor(pat::bangvar(xp, ty::bang(ep)), pat::sect(pat::var(f, ty::arrow(fin, fout)))),
            run(p, thp),
            mk::let_(pat::tensor(pat::bangvar(xq, ty::bang(eq)),
                                 pat::sect(pat::var(g, ty::arrow(gin, gout)))),
                     run(q, thq),
                     mk::pair(mk::bang(mk::pair(mk::bang(mk::var(xp)), mk::bang(mk::var(xq)))),
                              mk::sect(tangent))));
    }

    TermPtr fun_case(const TermPtr& t, const FwdTheta& theta) {
        const std::string& fname = t->a->name;
        int arity = fun_info(fname).arity;
        std::vector<std::string> args;
        if (arity == 1) {
            if (t->b->kind != TermKind::Bang || t->b->a->kind != TermKind::Var)
                err(ErrCode::NotPrimal, "function arguments must be variables: " + print_term(t));
            args.push_back(t->b->a->name);
        } else {
            const TermPtr& pr = t->b;
            if (pr->kind != TermKind::Pair || pr->a->kind != TermKind::Bang ||
                pr->a->a->kind != TermKind::Var || pr->b->kind != TermKind::Bang ||
                pr->b->a->kind != TermKind::Var)
                err(ErrCode::NotPrimal, "function arguments must be variables: " + print_term(t));
            args.push_back(pr->a->a->name);
            args.push_back(pr->b->a->name);
        }
        std::vector<std::string> ys;
        for (int i = 0; i < arity; i++) ys.push_back(s.fresh("d"));
        Slots sl = make_slots(theta);
        std::vector<TermPtr> scaled;
        for (int i = 0; i < arity; i++)
            scaled.push_back(mk::scale(mk::var(ys[size_t(i)]), sl.component.at(args[size_t(i)])));
        TermPtr sum = scaled[0];
        for (size_t i = 1; i < scaled.size(); i++) sum = mk::add(sum, scaled[i]);
        TermPtr out = mk::pair(t, mk::sect(mk::lam(sl.pattern, sum)));
        for (int i = arity; i-- > 0;)
            out = mk::let_(pat::bangvar(ys[size_t(i)], ty::bang(ty::real())),
                           fun_deriv_term(fname, i + 1, args, s), out);
        return out;
    }

    TermPtr let_case(const PatternPtr& bp, const TermPtr& q, const TermPtr& body,
                     const FwdTheta& theta) {
        FwdTheta thq = restrict_to(theta, q);
        TypePtr eqe = ptype(q);  // the bound term has type !E; bind x at E
        Fwd inner = *this;
        inner.env[bp->name] = eqe;
        bool x_used = free_vars(body).count(bp->name) != 0;
        FwdTheta thp2;
        for (auto& p : inner.restrict_to(theta, body))
            if (p.first != bp->name) thp2.push_back(p);
        FwdTheta thbody;
        if (x_used) thbody.push_back({bp->name, eqe});
        for (auto& p : thp2) thbody.push_back(p);

        std::string f = s.fresh("f"), g = s.fresh("g"), xr = s.fresh("x");
        TypePtr fin = input_type(thq), fout = trans_tangent_of_tensor_seq(eqe);
        TypePtr er = inner.ptype(body);
        TypePtr gin = inner.input_type(thbody), gout = trans_tangent_of_tensor_seq(er);

        Slots sl = make_slots(theta);
        std::vector<TermPtr> gparts;
        if (x_used) gparts.push_back(mk::app(mk::var(f), tuple_for(sl, thq)));
        for (auto& p : thp2) gparts.push_back(sl.component.at(p.first));
        TermPtr tangent = mk::lam(sl.pattern, mk::app(mk::var(g), nary_with_term(gparts)));
        return mk::let_(
            pat::tensor(pat::bangvar(bp->name, ty::bang(eqe)),
                        pat::sect(pat::var(f, ty::arrow(fin, fout)))),
            run(q, thq),
            mk::let_(pat::tensor(pat::bangvar(xr, ty::bang(er)),
                                 pat::sect(pat::var(g, ty::arrow(gin, gout)))),
                     inner.run(body, thbody),
                     mk::pair(mk::bang(mk::var(xr)), mk::sect(tangent))));
    }

    TermPtr tensor_case(const PatternPtr& p, const std::string& z, const TermPtr& body,
                        const FwdTheta& theta) {
        TypePtr ez = env.at(z);
        if (!(ez->kind == TypeKind::Tensor && ez->a->kind == TypeKind::Bang &&
              ez->b->kind == TypeKind::Bang))
            err(ErrCode::NotPrimal, "tensor elimination on a non-tensor variable " + z);
        Fwd inner = *this;
        inner.env[p->a->name] = ez->a->a;
        inner.env[p->b->name] = ez->b->a;
        auto fvb = free_vars(body);
        bool used1 = fvb.count(p->a->name) != 0, used2 = fvb.count(p->b->name) != 0;
        FwdTheta thbody_rest;
        for (auto& q : inner.restrict_to(theta, body))
            if (q.first != p->a->name && q.first != p->b->name) thbody_rest.push_back(q);
        FwdTheta thbody;
        if (used1) thbody.push_back({p->a->name, ez->a->a});
        if (used2) thbody.push_back({p->b->name, ez->b->a});
        for (auto& q : thbody_rest) thbody.push_back(q);

        std::string g = s.fresh("g"), xr = s.fresh("x");
        TypePtr er = inner.ptype(body);
        TypePtr gin = inner.input_type(thbody), gout = trans_tangent_of_tensor_seq(er);

        // the z component binds as a nested pattern so its halves feed g
        Slots sl;
        std::vector<PatternPtr> pats;
        std::string z1 = s.fresh("u"), z2 = s.fresh("u");
        for (auto& [n, e] : theta) {
            if (n == z) {
                pats.push_back(pat::with(pat::var(z1, trans_tangent_of_tensor_seq(ez->a->a)),
                                         pat::var(z2, trans_tangent_of_tensor_seq(ez->b->a))));
            } else {
                std::string c = s.fresh("u");
                sl.component[n] = mk::var(c);
                pats.push_back(pat::var(c, trans_tangent_of_tensor_seq(e)));
            }
        }
        sl.pattern = collect(pats);
        sl.component[p->a->name] = mk::var(z1);
        sl.component[p->b->name] = mk::var(z2);
        TermPtr garg = tuple_for(sl, thbody);
        TermPtr tangent = mk::lam(sl.pattern, mk::app(mk::var(g), garg));
        return mk::let_(
            p, mk::var(z),
            mk::let_(pat::tensor(pat::bangvar(xr, ty::bang(er)),
                                 pat::sect(pat::var(g, ty::arrow(gin, gout)))),
                     inner.run(body, thbody), mk::pair(mk::bang(mk::var(xr)), mk::sect(tangent))));
    }
};

}  // namespace

TermPtr forward(const TermPtr& p, const FwdTheta& theta, FreshSupply& supply) {
    supply.avoid_all_in(p);
    Fwd fwd{supply, {}};
    for (auto& [n, e] : theta) fwd.env[n] = e;
    return fwd.run(p, theta);
}

// ------------------------------------------------------------------ unzipping

UnzipDecomp unzip_decompose(const TermPtr& s) {
    if (s->kind == TermKind::Pair && is_sect_term(s->b))
        return {{}, s->a, s->b->b};
    PatternPtr p;
    TermPtr bound, body;
    if (match_let(s, p, bound, body)) {
        // let (!x, Sf) = S1 in S2
        if (p->kind == PatKind::Tensor && p->a->kind == PatKind::BangVar && is_sect_pat(p->b)) {
            UnzipDecomp d1 = unzip_decompose(bound);
            UnzipDecomp d2 = unzip_decompose(body);
            UnzipDecomp out;
            out.frames = std::move(d1.frames);
            out.frames.push_back({UnzipDecomp::Frame::Kind::BangLet, p->a, d1.primal, ""});
            for (auto& f : d2.frames) out.frames.push_back(std::move(f));
            out.primal = d2.primal;
            out.tangent = mk::let_(p->b, mk::sect(d1.tangent), d2.tangent);
            return out;
        }
        // let !x = P in S1
        if (p->kind == PatKind::BangVar) {
            UnzipDecomp d1 = unzip_decompose(body);
            UnzipDecomp out;
            out.frames.push_back({UnzipDecomp::Frame::Kind::BangLet, p, bound, ""});
            for (auto& f : d1.frames) out.frames.push_back(std::move(f));
            out.primal = d1.primal;
            out.tangent = d1.tangent;
            return out;
        }
        // let Sf = SF in S1
        if (is_sect_pat(p) && is_sect_term(bound)) {
            UnzipDecomp d1 = unzip_decompose(body);
            d1.tangent = mk::let_(p, bound, d1.tangent);
            return d1;
        }
        // let p* = z in S1
        if ((p->kind == PatKind::Unit ||
             (p->kind == PatKind::Tensor && p->a->kind == PatKind::BangVar &&
              p->b->kind == PatKind::BangVar)) &&
            bound->kind == TermKind::Var) {
            UnzipDecomp d1 = unzip_decompose(body);
            UnzipDecomp out;
            out.frames.push_back({UnzipDecomp::Frame::Kind::TensorLet, p, nullptr, bound->name});
            for (auto& f : d1.frames) out.frames.push_back(std::move(f));
            out.primal = d1.primal;
            out.tangent = d1.tangent;
            return out;
        }
    }
    err(ErrCode::NotSortR, "unzipping needs a sorted term: " + print_term(s));
}

TermPtr eps_wrap(const UnzipDecomp& d, TermPtr body) {
    for (size_t i = d.frames.size(); i-- > 0;) {
        const auto& f = d.frames[i];
        if (f.kind == UnzipDecomp::Frame::Kind::BangLet)
            body = mk::let_(f.pattern, f.bound, std::move(body));
        else
            body = mk::let_(f.pattern, mk::var(f.z), std::move(body));
    }
    return body;
}

TermPtr unzip(const TermPtr& s) {
    UnzipDecomp d = unzip_decompose(s);
    return eps_wrap(d, mk::pair(d.primal, mk::sect(d.tangent)));
}

// ------------------------------------------------------------------ transpose

namespace {

struct Trans {
    FreshSupply& s;

    struct Ctx {
        std::map<std::string, std::string> phi_bar;
        std::map<std::string, std::pair<TypePtr, TypePtr>> fun_types;  // original f -> (L, H)
        std::map<std::string, TypePtr> tan_types;
    };

    TypePtr type_of_u(const TermPtr& u, const Ctx& ctx) {
        switch (u->kind) {
            case TermKind::Var: {
                auto it = ctx.tan_types.find(u->name);
                if (it == ctx.tan_types.end())
                    err(ErrCode::IllTyped, "unknown additive variable " + u->name);
                return it->second;
            }
            case TermKind::Num: return ty::real();
            case TermKind::Top: return ty::top();
            case TermKind::WithPair:
                if (is_sect_term(u)) break;
                return ty::with(type_of_u(u->a, ctx), type_of_u(u->b, ctx));
            case TermKind::App: return fun_sig(u->a, ctx).second;
            default: break;
        }
        err(ErrCode::NotSortR, "not a tangent-sort term: " + print_term(u));
    }

    std::pair<TypePtr, TypePtr> fun_sig(const TermPtr& f, const Ctx& ctx) {
        switch (f->kind) {
            case TermKind::Lam: {
                Ctx inner = ctx;
                std::vector<std::pair<std::string, TypePtr>> binds;
                pattern_bindings(f->pat, binds);
                for (auto& [n, t] : binds) inner.tan_types[n] = t;
                return {pattern_type(f->pat), type_of_u(f->a, inner)};
            }
            case TermKind::Var: {
                auto it = ctx.fun_types.find(f->name);
                if (it == ctx.fun_types.end())
                    err(ErrCode::IllTyped, "unknown function variable " + f->name);
                return it->second;
            }
            case TermKind::DotPlus: return {ty::with(ty::real(), ty::real()), ty::real()};
            case TermKind::App:
                if (f->a->kind == TermKind::DotTimes) return {ty::real(), ty::real()};
                if (f->kind == TermKind::App && f->a->kind == TermKind::Lam) {
                    PatternPtr p;
                    TermPtr bound, body;
                    match_let(f, p, bound, body);
                    if (is_sect_pat(p) && is_sect_term(bound)) {
                        Ctx inner = ctx;
                        inner.fun_types[p->b->name] = fun_sig(bound->b, ctx);
                        return fun_sig(body, inner);
                    }
                }
                break;
            default: break;
        }
        err(ErrCode::NotSortR, "not a function-sort term: " + print_term(f));
    }

    Renaming fresh_renaming(const PatternPtr& p, const TermPtr& used_in, const char* suffix,
                            Ctx& ctx) {
        auto fv = free_vars(used_in);
        Renaming a;
        for (auto& v : pattern_vars(p)) {
            if (!fv.count(v)) continue;
            std::string nn = s.fresh(strip_hash(v) + suffix);
            a.map[v] = nn;
            auto it = ctx.tan_types.find(v);
            if (it != ctx.tan_types.end()) ctx.tan_types[nn] = it->second;
        }
        return a;
    }

    static Renaming identity_on(const PatternPtr& p, const TermPtr& used_in) {
        auto fv = free_vars(used_in);
        Renaming a;
        for (auto& v : pattern_vars(p))
            if (fv.count(v)) a.map[v] = v;
        return a;
    }

    struct TU {
        TermPtr out;
        PatternPtr qpat;
    };

    // p is the already-restricted pattern (every variable occurs in u).
    TU tangent(const TermPtr& u, const PatternPtr& p, const Ctx& ctx) {
        switch (u->kind) {
            case TermKind::Var:
                return {mk::var(u->name), pat::var(u->name, type_of_u(u, ctx))};
            case TermKind::Num: {
                if (u->value != 0.0)
                    err(ErrCode::NotSortR, "numerals other than 0 are not tangent-sort");
                return {mk::top(), fresh_with_pattern(ty::real(), s)};
            }
            case TermKind::Top: return {mk::top(), fresh_with_pattern(ty::top(), s)};
            case TermKind::WithPair: {
                Ctx cx = ctx;
                Renaming a1 = fresh_renaming(p, u->a, "1", cx);
                Renaming a2 = fresh_renaming(p, u->b, "2", cx);
                PatternPtr p1 = pattern_rename(p, a1, s);
                PatternPtr p2 = pattern_rename(p, a2, s);
                TU t1 = tangent(term_rename(u->a, a1), p1, cx);
                TU t2 = tangent(term_rename(u->b, a2), p2, cx);
                TermPtr out = mk::app(mu_term(p, a1, a2, s), mk::withpair(t1.out, t2.out));
                return {out, pat::with(t1.qpat, t2.qpat)};
            }
            case TermKind::App: {
                // F U'
                auto [l2, h] = fun_sig(u->a, ctx);
                TermPtr tf = fun(u->a, ctx);
                PatternPtr q = fresh_with_pattern(h, s);
                TU tu = tangent(u->b, p, ctx);
                TermPtr out = mk::app(mk::lam(tu.qpat, tu.out), mk::app(tf, pattern_as_term(q)));
                return {out, q};
            }
            default: err(ErrCode::NotSortR, "not a tangent-sort term: " + print_term(u));
        }
    }

    TermPtr fun(const TermPtr& f, const Ctx& ctx) {
        switch (f->kind) {
            case TermKind::Lam: {
                Ctx inner = ctx;
                std::vector<std::pair<std::string, TypePtr>> binds;
                pattern_bindings(f->pat, binds);
                for (auto& [n, t] : binds) inner.tan_types[n] = t;
                Renaming id = identity_on(f->pat, f->a);
                PatternPtr restricted = pattern_rename(f->pat, id, s);
                TU tu = tangent(f->a, restricted, inner);
                TermPtr wrapped =
                    mk::app(mu_term(f->pat, id, Renaming{}, s), mk::withpair(tu.out, mk::top()));
                return mk::lam(tu.qpat, wrapped);
            }
            case TermKind::Var: {
                auto it = ctx.phi_bar.find(f->name);
                if (it == ctx.phi_bar.end())
                    err(ErrCode::IllTyped, "no transposed name for function variable " + f->name);
                return mk::var(it->second);
            }
            case TermKind::DotPlus: {
                std::string uv = s.fresh("u");
                return mk::lam(pat::var(uv, ty::real()),
                               mk::withpair(mk::var(uv), mk::var(uv)));
            }
            case TermKind::App: {
                if (f->a->kind == TermKind::DotTimes) return f;  // T(dot* x) = dot* x
                PatternPtr p;
                TermPtr bound, body;
                if (match_let(f, p, bound, body) && is_sect_pat(p) && is_sect_term(bound)) {
                    const std::string& fn = p->b->name;
                    if (!free_vars(body).count(fn)) return fun(body, ctx);
                    auto lh = fun_sig(bound->b, ctx);
                    TermPtr tf = fun(bound->b, ctx);
                    Ctx inner = ctx;
                    std::string fbar = s.fresh(strip_hash(fn) + "r");
                    inner.phi_bar[fn] = fbar;
                    inner.fun_types[fn] = lh;
                    return mk::let_(pat::sect(pat::var(fbar, ty::arrow(lh.second, lh.first))),
                                    mk::sect(tf), fun(body, inner));
                }
                break;
            }
            default: break;
        }
        err(ErrCode::NotSortR, "not a function-sort term: " + print_term(f));
    }

    TermPtr sorted(const TermPtr& r, const Ctx& ctx) {
        if (r->kind == TermKind::Pair && is_sect_term(r->b))
            return mk::pair(r->a, mk::sect(fun(r->b->b, ctx)));
        PatternPtr p;
        TermPtr bound, body;
        if (match_let(r, p, bound, body)) {
            // let (!x, Sf) = R' in S
            if (p->kind == PatKind::Tensor && p->a->kind == PatKind::BangVar && is_sect_pat(p->b)) {
                const std::string& fn = p->b->b->name;
                TypePtr fty = p->b->b->type;
                if (fty->kind != TypeKind::Arrow)
                    err(ErrCode::IllTyped, "affine binder " + fn + " lacks an arrow type");
                if (!free_vars(body).count(fn)) {
                    UnzipDecomp d = unzip_decompose(bound);
                    return mk::let_(p->a, eps_wrap(d, d.primal), sorted(body, ctx));
                }
                Ctx inner = ctx;
                std::string fbar = s.fresh(strip_hash(fn) + "r");
                inner.phi_bar[fn] = fbar;
                inner.fun_types[fn] = {fty->a, fty->b};
                return mk::let_(
                    pat::tensor(p->a, pat::sect(pat::var(fbar, ty::arrow(fty->b, fty->a)))),
                    sorted(bound, ctx), sorted(body, inner));
            }
            // let Sf = SF in S
            if (is_sect_pat(p) && is_sect_term(bound)) {
                const std::string& fn = p->b->name;
                TypePtr fty = p->b->type;
                if (!free_vars(body).count(fn)) return sorted(body, ctx);
                Ctx inner = ctx;
                std::string fbar = s.fresh(strip_hash(fn) + "r");
                inner.phi_bar[fn] = fbar;
                inner.fun_types[fn] = {fty->a, fty->b};
                return mk::let_(pat::sect(pat::var(fbar, ty::arrow(fty->b, fty->a))),
                                mk::sect(fun(bound->b, ctx)), sorted(body, inner));
            }
            // let !x = P in S
            if (p->kind == PatKind::BangVar)
                return mk::let_(p, bound, sorted(body, ctx));
            // let p* = z in S
            if ((p->kind == PatKind::Unit ||
                 (p->kind == PatKind::Tensor && p->a->kind == PatKind::BangVar &&
                  p->b->kind == PatKind::BangVar)) &&
                bound->kind == TermKind::Var)
                return mk::let_(p, bound, sorted(body, ctx));
        }
        err(ErrCode::NotSortR, "transpose needs a sorted term: " + print_term(r));
    }
};

Trans::Ctx to_inner_ctx(const TransposeCtx& ctx) {
    Trans::Ctx c;
    c.phi_bar = ctx.phi_bar;
    for (auto& [f, lh] : ctx.fun_types) c.fun_types[f] = lh;
    c.tan_types = ctx.tan_types;
    return c;
}

}  // namespace

TermPtr transpose(const TermPtr& r, FreshSupply& supply, const TransposeCtx& ctx) {
    supply.avoid_all_in(r);
    Trans tr{supply};
    return tr.sorted(r, to_inner_ctx(ctx));
}

TermPtr transpose_fun(const TermPtr& f, FreshSupply& supply, const TransposeCtx& ctx) {
    supply.avoid_all_in(f);
    Trans tr{supply};
    return tr.fun(f, to_inner_ctx(ctx));
}

TermPtr grad_pipeline_term(const TermPtr& p, const FwdTheta& theta, bool skip_unzip,
                           FreshSupply& supply) {
    TermPtr fwd = forward(p, theta, supply);
    TermPtr r = skip_unzip ? fwd : unzip(fwd);
    return transpose(r, supply);
}

TermPtr dual_transpose_oracle(const TermPtr& u, const PatternPtr& p, const TypePtr& h,
                              FreshSupply& supply) {
    supply.avoid_all_in(u);
    TypePtr l = pattern_type(p);
    if (!is_with_seq(l) || !is_with_seq(h))
        err(ErrCode::TypeMismatch, "dual transpose oracle is defined at &-sequence types");
    PatternPtr q = fresh_with_pattern(h, supply);
    TermPtr inner = mk::app(mk::app(dual_term(h, supply), pattern_as_term(q)), u);
    TermPtr body = mk::app(dual_bar_term(l, supply), mk::lam(p, inner));
    return mk::lam(q, body);
}

}  // namespace llad
