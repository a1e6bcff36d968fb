#include "llad/translate.hpp"

#include <algorithm>
#include <functional>

#include "llad/seq.hpp"
#include "llad/syntax.hpp"

namespace llad {

using lina::JKind;
using lina::JTPtr;
using lina::LKind;
using lina::LinPtr;
using lina::LinTyping;

TypePtr trans_primal_type(const JTPtr& t) {
    switch (t->kind) {
        case JKind::Real: return ty::real();
        case JKind::One: return ty::unit();
        case JKind::Tensor:
            return ty::tensor(ty::bang(trans_primal_type(t->a)), ty::bang(trans_primal_type(t->b)));
    }
    throw internal_error("trans_primal_type");
}

TypePtr trans_tangent_type(const JTPtr& t) {
    switch (t->kind) {
        case JKind::Real: return ty::real();
        case JKind::One: return ty::top();
        case JKind::Tensor: return ty::with(trans_tangent_type(t->a), trans_tangent_type(t->b));
    }
    throw internal_error("trans_tangent_type");
}

TypePtr trans_tangent_of_tensor_seq(const TypePtr& e) {
    switch (e->kind) {
        case TypeKind::Real: return ty::real();
        case TypeKind::Unit: return ty::top();
        case TypeKind::Tensor:
            if (e->a->kind == TypeKind::Bang && e->b->kind == TypeKind::Bang)
                return ty::with(trans_tangent_of_tensor_seq(e->a->a),
                                trans_tangent_of_tensor_seq(e->b->a));
            [[fallthrough]];
        default:
            throw user_error(ErrCode::TypeMismatch,
                             "not a tensor-sequence type: " + print_type(e));
    }
}

TermPtr retraction_section(const JTPtr& tau, FreshSupply& s) {
    // !p(tau) -o !t(tau); primal data is morally the promotion of tangent data
    std::string x = s.fresh("x");
    TypePtr pin = ty::bang(trans_primal_type(tau));
    switch (tau->kind) {
        case JKind::Real: return mk::lam(pat::bangvar(x, pin), mk::bang(mk::var(x)));
        case JKind::One: return mk::lam(pat::bangvar(x, pin), mk::bang(mk::top()));
        case JKind::Tensor: {
            std::string a = s.fresh("a"), b = s.fresh("b");
            std::string ra = s.fresh("r"), rb = s.fresh("r");
            TermPtr sa = retraction_section(tau->a, s), sb = retraction_section(tau->b, s);
            TypePtr ta = trans_tangent_type(tau->a), tb = trans_tangent_type(tau->b);
            // lam !x . let (!a, !b) = x in
            //          let !ra = sa !a in let !rb = sb !b in !<ra, rb>
            TermPtr body = mk::let_(
                pat::tensor(pat::bangvar(a, ty::bang(trans_primal_type(tau->a))),
                            pat::bangvar(b, ty::bang(trans_primal_type(tau->b)))),
                mk::var(x),
                mk::let_(pat::bangvar(ra, ty::bang(ta)), mk::app(sa, mk::bang(mk::var(a))),
                         mk::let_(pat::bangvar(rb, ty::bang(tb)), mk::app(sb, mk::bang(mk::var(b))),
                                  mk::bang(mk::withpair(mk::var(ra), mk::var(rb))))));
            return mk::lam(pat::bangvar(x, pin), body);
        }
    }
    throw internal_error("retraction_section");
}

TermPtr retraction_retract(const JTPtr& tau, FreshSupply& s) {
    // !t(tau) -o !p(tau)
    std::string h = s.fresh("h");
    TypePtr tin = ty::bang(trans_tangent_type(tau));
    switch (tau->kind) {
        case JKind::Real: return mk::lam(pat::bangvar(h, tin), mk::bang(mk::var(h)));
        case JKind::One: return mk::lam(pat::bangvar(h, tin), mk::bang(mk::unit()));
        case JKind::Tensor: {
            TypePtr th = trans_tangent_type(tau);
            TermPtr ra = retraction_retract(tau->a, s), rb = retraction_retract(tau->b, s);
            std::string a1 = s.fresh("h"), b1 = s.fresh("h");
            std::string a2 = s.fresh("h"), b2 = s.fresh("h");
            std::string xa = s.fresh("r"), xb = s.fresh("r");
            TermPtr proj1 = mk::bang(mk::app(
                mk::lam(pat::with(pat::var(a1, th->a), pat::var(b1, th->b)), mk::var(a1)),
                mk::var(h)));
            TermPtr proj2 = mk::bang(mk::app(
                mk::lam(pat::with(pat::var(a2, th->a), pat::var(b2, th->b)), mk::var(b2)),
                mk::var(h)));
            TermPtr body = mk::let_(
                pat::bangvar(xa, ty::bang(trans_primal_type(tau->a))), mk::app(ra, proj1),
                mk::let_(pat::bangvar(xb, ty::bang(trans_primal_type(tau->b))), mk::app(rb, proj2),
                         mk::bang(mk::pair(mk::bang(mk::var(xa)), mk::bang(mk::var(xb))))));
            return mk::lam(pat::bangvar(h, tin), body);
        }
    }
    throw internal_error("retraction_retract");
}

// ---------------------------------------------------------------------------
// delta and delta_b
// ---------------------------------------------------------------------------

namespace {

using Theta = std::vector<std::pair<std::string, JTPtr>>;

Theta theta_restrict(const Theta& theta, const LinPtr& e) {
    auto fv = lina::fv_tangent(e);
    std::unordered_set<std::string> fvs(fv.begin(), fv.end());
    Theta out;
    for (auto& p : theta)
        if (fvs.count(p.first)) out.push_back(p);
    return out;
}

std::vector<TypePtr> theta_types(const Theta& theta) {
    std::vector<TypePtr> out;
    for (auto& [n, t] : theta) out.push_back(trans_tangent_type(t));
    return out;
}

std::vector<int> theta_positions(const Theta& theta, const Theta& sub) {
    std::vector<int> out;
    for (auto& [n, _] : sub)
        for (size_t i = 0; i < theta.size(); i++)
            if (theta[i].first == n) out.push_back(int(i));
    std::sort(out.begin(), out.end());
    return out;
}

PatternPtr sect_fun_pat(const std::string& f, const TypePtr& in, const TypePtr& out) {
    return pat::sect(pat::var(f, ty::arrow(in, out)));
}

struct Delta {
    FreshSupply& s;
    const LinTyping& ti;

    JTPtr tau_of(const LinPtr& e) const { return ti.node_types.at(e.get()).first; }
    JTPtr sigma_of(const LinPtr& e) const { return ti.node_types.at(e.get()).second; }

    TypePtr input_type(const Theta& theta) const { return with_seq_type(theta_types(theta)); }

    // (P, S F)
    static TermPtr pack(TermPtr p, TermPtr f) { return mk::pair(std::move(p), mk::sect(std::move(f))); }

    TermPtr run(const LinPtr& e, const Theta& theta) {
        switch (e->kind) {
            case LKind::VarPair: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::var(e->x)),
                            mk::lam(pat::var(y, input_type(theta)), mk::var(y)));
            }
            case LKind::LetPair: {
                Theta th1 = theta_restrict(theta, e->a);
                Theta th2raw = theta_restrict(theta, e->b);
                Theta th2;
                for (auto& p : th2raw)
                    if (p.first != e->y) th2.push_back(p);
                Theta th2x;
                th2x.push_back({e->y, sigma_of(e->a)});
                for (auto& p : th2) th2x.push_back(p);

                std::string f = s.fresh("f"), g = s.fresh("g"), z = s.fresh("z");
                std::string y = s.fresh("y"), y1 = s.fresh("y"), y2 = s.fresh("y");
                TypePtr fin = input_type(th1), fout = trans_tangent_type(sigma_of(e->a));
                TypePtr gin = input_type(th2x), gout = trans_tangent_type(sigma_of(e->b));

                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, th1),
                                            mk::var(y), s);
                TermPtr fused = apply_fuse(theta_types(th2x), {0},
                                           mk::withpair(mk::app(mk::var(f), mk::var(y1)),
                                                        mk::var(y2)),
                                           s);
                TermPtr body = mk::let_(
                    pat::with(pat::var(y1, fin), pat::var(y2, input_type(th2))), split,
                    mk::app(mk::var(g), fused));
                TermPtr tangent = mk::lam(pat::var(y, input_type(theta)), body);

                return mk::let_(
                    pat::tensor(pat::bangvar(e->x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                sect_fun_pat(f, fin, fout)),
                    run(e->a, th1),
                    mk::let_(pat::tensor(pat::bangvar(z, ty::bang(trans_primal_type(tau_of(e->b)))),
                                         sect_fun_pat(g, gin, gout)),
                             run(e->b, th2x), pack(mk::bang(mk::var(z)), tangent)));
            }
            case LKind::TupP0: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::unit()), mk::lam(pat::var(y, ty::top()), mk::top()));
            }
            case LKind::TupP2: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::pair(mk::bang(mk::var(e->x)), mk::bang(mk::var(e->y)))),
                            mk::lam(pat::var(y, ty::top()), mk::top()));
            }
            case LKind::LetTupP0:
                return mk::let_(pat::unit(), mk::var(e->z), run(e->a, theta));
            case LKind::LetTupP2: {
                JTPtr zt = ti.primal_types.at(e->z);
                return mk::let_(
                    pat::tensor(pat::bangvar(e->x, ty::bang(trans_primal_type(zt->a))),
                                pat::bangvar(e->y, ty::bang(trans_primal_type(zt->b)))),
                    mk::var(e->z), run(e->a, theta));
            }
            case LKind::TupT0: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::unit()), mk::lam(pat::var(y, ty::top()), mk::top()));
            }
            case LKind::TupT2: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::unit()),
                            mk::lam(pat::var(y, input_type(theta)), mk::var(y)));
            }
            case LKind::LetTupT0: {
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                std::string f = s.fresh("f"), x = s.fresh("x");
                std::string y = s.fresh("y"), z = s.fresh("z"), yr = s.fresh("y");
                TypePtr fin = input_type(thr), fout = trans_tangent_type(sigma_of(e->a));
                Theta self{{e->z, lina::jt_one()}};
                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, self),
                                            mk::var(y), s);
                TermPtr body = mk::let_(pat::with(pat::var(z, ty::top()), pat::var(yr, fin)), split,
                                        mk::app(mk::var(f), mk::var(yr)));
                return mk::let_(
                    pat::tensor(pat::bangvar(x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                sect_fun_pat(f, fin, fout)),
                    run(e->a, thr),
                    pack(mk::bang(mk::var(x)),
                         mk::lam(pat::var(y, input_type(theta)), body)));
            }
            case LKind::LetTupT2: {
                JTPtr zt = ti.tangent_types.at(e->z);
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                Theta inner;
                inner.push_back({e->x, zt->a});
                inner.push_back({e->y, zt->b});
                for (auto& p : thr) inner.push_back(p);
                std::string f = s.fresh("f"), x = s.fresh("x");
                std::string y = s.fresh("y"), z = s.fresh("z"), yr = s.fresh("y");
                TypePtr fin = input_type(inner), fout = trans_tangent_type(sigma_of(e->a));
                Theta self{{e->z, zt}};
                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, self),
                                            mk::var(y), s);
                TermPtr fused = apply_fuse(theta_types(inner), {0, 1},
                                           mk::withpair(mk::var(z), mk::var(yr)), s);
                TermPtr body =
                    mk::let_(pat::with(pat::var(z, trans_tangent_type(zt)), pat::var(yr, input_type(thr))),
                             split, mk::app(mk::var(f), fused));
                return mk::let_(
                    pat::tensor(pat::bangvar(x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                sect_fun_pat(f, fin, fout)),
                    run(e->a, inner),
                    pack(mk::bang(mk::var(x)),
                         mk::lam(pat::var(y, input_type(theta)), body)));
            }
            case LKind::Num: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::num(e->value)), mk::lam(pat::var(y, ty::top()), mk::top()));
            }
            case LKind::PrimApp: {
                std::string y = s.fresh("y");
                TermPtr arg;
                if (e->args.size() == 1) {
                    arg = mk::bang(mk::var(e->args[0]));
                } else {
                    arg = mk::pair(mk::bang(mk::var(e->args[0])), mk::bang(mk::var(e->args[1])));
                }
                return pack(mk::app(mk::fun(e->fn), arg),
                            mk::lam(pat::var(y, ty::top()), mk::top()));
            }
            case LKind::Zero: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::unit()),
                            mk::lam(pat::var(y, ty::top()), zero_term(trans_tangent_type(e->ty))));
            }
            case LKind::Add: {
                std::string y = s.fresh("y");
                TypePtr h = trans_tangent_type(sigma_of(e));
                TermPtr body = h->kind == TypeKind::Real
                                   ? mk::app(mk::dotplus(), mk::var(y))
                                   : mk::app(plus_term(h, s), mk::var(y));
                return pack(mk::bang(mk::unit()), mk::lam(pat::var(y, input_type(theta)), body));
            }
            case LKind::Scale: {
                std::string y = s.fresh("y");
                TypePtr h = trans_tangent_type(sigma_of(e));
                return pack(mk::bang(mk::unit()),
                            mk::lam(pat::var(y, input_type(theta)),
                                    apply_times(h, mk::var(e->x), mk::var(y), s)));
            }
            case LKind::Dup: {
                std::string y = s.fresh("y");
                return pack(mk::bang(mk::unit()),
                            mk::lam(pat::var(y, input_type(theta)),
                                    mk::withpair(mk::var(y), mk::var(y))));
            }
            case LKind::Drop: {
                std::string f = s.fresh("f"), x = s.fresh("x");
                std::string y = s.fresh("y"), z = s.fresh("z");
                TypePtr fin = input_type(theta), fout = trans_tangent_type(sigma_of(e->a));
                TermPtr body = mk::let_(pat::var(z, fout), mk::app(mk::var(f), mk::var(y)), mk::top());
                return mk::let_(
                    pat::tensor(pat::bangvar(x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                sect_fun_pat(f, fin, fout)),
                    run(e->a, theta),
                    pack(mk::bang(mk::unit()), mk::lam(pat::var(y, input_type(theta)), body)));
            }
            default:
                throw internal_error("delta on sugar node; desugar first");
        }
    }
};

}  // namespace

TermPtr delta(const LinPtr& e, const Theta& theta, FreshSupply& supply) {
    std::unordered_set<std::string> names;
    lina::lin_all_names(e, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (!n.empty() && n.back() == '\'') supply.avoid(n.substr(0, n.size() - 1));
    }
    LinPtr core = lina::desugar(lina::lin_alpha_unique(e, supply), supply);
    LinTyping ti = lina::jax_infer(core);
    // the enumeration must cover exactly the free tangent variables
    Delta d{supply, ti};
    return d.run(core, theta);
}

TermPtr delta(const LinPtr& e, FreshSupply& supply) {
    std::unordered_set<std::string> names;
    lina::lin_all_names(e, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (!n.empty() && n.back() == '\'') supply.avoid(n.substr(0, n.size() - 1));
    }
    LinPtr eu = lina::lin_alpha_unique(e, supply);
    LinPtr core = lina::desugar(eu, supply);
    LinTyping ti = lina::jax_infer(core);
    Delta d{supply, ti};
    return d.run(core, ti.judgment.tangent_env);
}

// ------------------------------------------------------------------- delta_b

namespace {

struct DeltaB {
    FreshSupply& s;
    const LinTyping& ti;

    JTPtr tau_of(const LinPtr& e) const { return ti.node_types.at(e.get()).first; }
    JTPtr sigma_of(const LinPtr& e) const { return ti.node_types.at(e.get()).second; }
    TypePtr input_type(const Theta& theta) const { return with_seq_type(theta_types(theta)); }

    TermPtr primal(const LinPtr& e) {
        switch (e->kind) {
            case LKind::PrimVar: return mk::bang(mk::var(e->x));
            case LKind::LetPrim:
                return mk::let_(pat::bangvar(e->x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                primal(e->a), primal(e->b));
            case LKind::TupP0: return mk::bang(mk::unit());
            case LKind::TupP2:
                return mk::bang(mk::pair(mk::bang(mk::var(e->x)), mk::bang(mk::var(e->y))));
            case LKind::TupPE: return mk::bang(mk::pair(primal(e->a), primal(e->b)));
            case LKind::LetTupP0: return mk::let_(pat::unit(), mk::var(e->z), primal(e->a));
            case LKind::LetTupP2: {
                JTPtr zt = ti.primal_types.at(e->z);
                return mk::let_(
                    pat::tensor(pat::bangvar(e->x, ty::bang(trans_primal_type(zt->a))),
                                pat::bangvar(e->y, ty::bang(trans_primal_type(zt->b)))),
                    mk::var(e->z), primal(e->a));
            }
            case LKind::Num: return mk::bang(mk::num(e->value));
            case LKind::PrimApp: {
                TermPtr arg = e->args.size() == 1
                                  ? mk::bang(mk::var(e->args[0]))
                                  : mk::pair(mk::bang(mk::var(e->args[0])),
                                             mk::bang(mk::var(e->args[1])));
                return mk::app(mk::fun(e->fn), arg);
            }
            case LKind::Drop: {
                std::string x = s.fresh("x");
                return mk::let_(pat::bangvar(x, ty::bang(trans_primal_type(tau_of(e->a)))),
                                primal(e->a), mk::bang(mk::unit()));
            }
            default:
                throw user_error(ErrCode::NotPrimal,
                                 "not a purely primal expression: " + lina::print_lin(e));
        }
    }

    TermPtr let_sect(const std::string& f, TypePtr fin, TypePtr fout, TermPtr F, TermPtr body) {
        return mk::let_(sect_fun_pat(f, std::move(fin), std::move(fout)), mk::sect(std::move(F)),
                        std::move(body));
    }

    TermPtr tangent(const LinPtr& e, const Theta& theta) {
        switch (e->kind) {
            case LKind::TanVar: {
                std::string y = s.fresh("y");
                return mk::lam(pat::var(y, input_type(theta)), mk::var(y));
            }
            case LKind::LetTan: {
                Theta th1 = theta_restrict(theta, e->a);
                Theta th2raw = theta_restrict(theta, e->b);
                Theta th2;
                for (auto& p : th2raw)
                    if (p.first != e->y) th2.push_back(p);
                Theta th2x;
                th2x.push_back({e->y, sigma_of(e->a)});
                for (auto& p : th2) th2x.push_back(p);
                std::string f = s.fresh("f"), g = s.fresh("g");
                std::string y = s.fresh("y"), y1 = s.fresh("y"), y2 = s.fresh("y");
                TypePtr fin = input_type(th1), fout = trans_tangent_type(sigma_of(e->a));
                TypePtr gin = input_type(th2x), gout = trans_tangent_type(sigma_of(e->b));
                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, th1),
                                            mk::var(y), s);
                TermPtr fused = apply_fuse(theta_types(th2x), {0},
                                           mk::withpair(mk::app(mk::var(f), mk::var(y1)),
                                                        mk::var(y2)),
                                           s);
                TermPtr body =
                    mk::let_(pat::with(pat::var(y1, fin), pat::var(y2, input_type(th2))), split,
                             mk::app(mk::var(g), fused));
                return let_sect(f, fin, fout, tangent(e->a, th1),
                                let_sect(g, gin, gout, tangent(e->b, th2x),
                                         mk::lam(pat::var(y, input_type(theta)), body)));
            }
            case LKind::TupT0: {
                std::string y = s.fresh("y");
                return mk::lam(pat::var(y, ty::top()), mk::top());
            }
            case LKind::TupT2:
                return tangent_pair(le_tan(e->x), le_tan(e->y), theta);
            case LKind::TupTE: return tangent_pair(e->a, e->b, theta);
            case LKind::LetTupT0: {
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                std::string f = s.fresh("f");
                std::string y = s.fresh("y"), z = s.fresh("z"), yr = s.fresh("y");
                TypePtr fin = input_type(thr), fout = trans_tangent_type(sigma_of(e->a));
                Theta self{{e->z, lina::jt_one()}};
                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, self),
                                            mk::var(y), s);
                TermPtr body = mk::let_(pat::with(pat::var(z, ty::top()), pat::var(yr, fin)), split,
                                        mk::app(mk::var(f), mk::var(yr)));
                return let_sect(f, fin, fout, tangent(e->a, thr),
                                mk::lam(pat::var(y, input_type(theta)), body));
            }
            case LKind::LetTupT2: {
                JTPtr zt = ti.tangent_types.at(e->z);
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                Theta inner;
                inner.push_back({e->x, zt->a});
                inner.push_back({e->y, zt->b});
                for (auto& p : thr) inner.push_back(p);
                std::string f = s.fresh("f");
                std::string y = s.fresh("y"), z = s.fresh("z"), yr = s.fresh("y");
                TypePtr fin = input_type(inner), fout = trans_tangent_type(sigma_of(e->a));
                Theta self{{e->z, zt}};
                TermPtr split = apply_split(theta_types(theta), theta_positions(theta, self),
                                            mk::var(y), s);
                TermPtr fused = apply_fuse(theta_types(inner), {0, 1},
                                           mk::withpair(mk::var(z), mk::var(yr)), s);
                TermPtr body = mk::let_(
                    pat::with(pat::var(z, trans_tangent_type(zt)), pat::var(yr, input_type(thr))),
                    split, mk::app(mk::var(f), fused));
                return let_sect(f, fin, fout, tangent(e->a, inner),
                                mk::lam(pat::var(y, input_type(theta)), body));
            }
            case LKind::Dup: {
                std::string y = s.fresh("y");
                return mk::lam(pat::var(y, input_type(theta)),
                               mk::withpair(mk::var(y), mk::var(y)));
            }
            case LKind::Zero: {
                std::string y = s.fresh("y");
                return mk::lam(pat::var(y, ty::top()), zero_term(trans_tangent_type(e->ty)));
            }
            case LKind::Add: {
                std::string y = s.fresh("y");
                TypePtr h = trans_tangent_type(sigma_of(e));
                TermPtr body = h->kind == TypeKind::Real
                                   ? mk::app(mk::dotplus(), mk::var(y))
                                   : mk::app(plus_term(h, s), mk::var(y));
                return mk::lam(pat::var(y, input_type(theta)), body);
            }
            case LKind::Scale: {
                std::string y = s.fresh("y");
                TypePtr h = trans_tangent_type(sigma_of(e));
                return mk::lam(pat::var(y, input_type(theta)),
                               apply_times(h, mk::var(e->x), mk::var(y), s));
            }
            case LKind::Drop: {
                std::string f = s.fresh("f");
                std::string y = s.fresh("y"), z = s.fresh("z");
                TypePtr fin = input_type(theta), fout = trans_tangent_type(sigma_of(e->a));
                TermPtr body =
                    mk::let_(pat::var(z, fout), mk::app(mk::var(f), mk::var(y)), mk::top());
                return let_sect(f, fin, fout, tangent(e->a, theta),
                                mk::lam(pat::var(y, input_type(theta)), body));
            }
            default:
                throw user_error(ErrCode::NotSortR,
                                 "not a purely tangent expression: " + lina::print_lin(e));
        }
    }

    static LinPtr le_tan(const std::string& n) { return lina::le::tan_var(n); }

    TermPtr tangent_pair(const LinPtr& e1, const LinPtr& e2, const Theta& theta) {
        Theta th1 = theta_restrict(theta, e1);
        Theta th2 = theta_restrict(theta, e2);
        std::string f = s.fresh("f"), g = s.fresh("g");
        std::string y = s.fresh("y"), y1 = s.fresh("y"), y2 = s.fresh("y");
        TypePtr fin = input_type(th1), fout = trans_tangent_type(sigma_of_expr(e1));
        TypePtr gin = input_type(th2), gout = trans_tangent_type(sigma_of_expr(e2));
        TermPtr split =
            apply_split(theta_types(theta), theta_positions(theta, th1), mk::var(y), s);
        TermPtr body = mk::let_(pat::with(pat::var(y1, fin), pat::var(y2, gin)), split,
                                mk::withpair(mk::app(mk::var(f), mk::var(y1)),
                                             mk::app(mk::var(g), mk::var(y2))));
        return let_sect(f, fin, fout, tangent(e1, th1),
                        let_sect(g, gin, gout, tangent(e2, th2),
                                 mk::lam(pat::var(y, input_type(theta)), body)));
    }

    // sigma for possibly synthesized TanVar nodes
    JTPtr sigma_of_expr(const LinPtr& e) {
        if (e->kind == LKind::TanVar) {
            auto it = ti.tangent_types.find(e->y);
            if (it != ti.tangent_types.end()) return it->second;
        }
        return sigma_of(e);
    }

    TermPtr linear_b(const LinPtr& d, const Theta& theta) {
        switch (d->kind) {
            case LKind::VarPair:
                return mk::pair(mk::bang(mk::var(d->x)),
                                mk::sect(tangent(le_tan(d->y), theta)));
            case LKind::PairE:
                return mk::pair(primal(d->a), mk::sect(tangent(d->b, theta)));
            case LKind::LetPrim:
                return mk::let_(pat::bangvar(d->x, ty::bang(trans_primal_type(tau_of(d->a)))),
                                primal(d->a), linear_b(d->b, theta));
            case LKind::LetTupP0:
                return mk::let_(pat::unit(), mk::var(d->z), linear_b(d->a, theta));
            case LKind::LetTupP2: {
                JTPtr zt = ti.primal_types.at(d->z);
                return mk::let_(
                    pat::tensor(pat::bangvar(d->x, ty::bang(trans_primal_type(zt->a))),
                                pat::bangvar(d->y, ty::bang(trans_primal_type(zt->b)))),
                    mk::var(d->z), linear_b(d->a, theta));
            }
            default:
                throw user_error(ErrCode::NotSortR,
                                 "not a Linear B expression: " + lina::print_lin(d));
        }
    }
};

void seed_supply(const LinPtr& e, FreshSupply& supply) {
    std::unordered_set<std::string> names;
    lina::lin_all_names(e, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (!n.empty() && n.back() == '\'') supply.avoid(n.substr(0, n.size() - 1));
    }
}

}  // namespace

TermPtr delta_b(const LinPtr& d, const Theta& theta, FreshSupply& supply) {
    seed_supply(d, supply);
    LinPtr du = lina::lin_alpha_unique(d, supply);
    LinTyping ti = lina::jax_infer(du);
    DeltaB db{supply, ti};
    if (lina::is_primal_expr(du)) return db.primal(du);
    if (lina::is_tangent_expr(du)) return db.tangent(du, theta);
    return db.linear_b(du, theta);
}

TermPtr delta_b(const LinPtr& d, FreshSupply& supply) {
    seed_supply(d, supply);
    LinPtr du = lina::lin_alpha_unique(d, supply);
    LinTyping ti = lina::jax_infer(du);
    DeltaB db{supply, ti};
    if (lina::is_primal_expr(du)) return db.primal(du);
    if (lina::is_tangent_expr(du)) return db.tangent(du, ti.judgment.tangent_env);
    return db.linear_b(du, ti.judgment.tangent_env);
}

TermPtr delta_b_primal(const LinPtr& ep, FreshSupply& supply) {
    if (!lina::is_primal_expr(ep))
        throw user_error(ErrCode::NotPrimal, "expected a purely primal expression");
    seed_supply(ep, supply);
    LinPtr eu = lina::lin_alpha_unique(ep, supply);
    LinTyping ti = lina::jax_infer(eu);
    DeltaB db{supply, ti};
    return db.primal(eu);
}

TermPtr delta_b_tangent(const LinPtr& et, const Theta& theta, FreshSupply& supply) {
    if (!lina::is_tangent_expr(et))
        throw user_error(ErrCode::NotSortR, "expected a purely tangent expression");
    seed_supply(et, supply);
    LinPtr eu = lina::lin_alpha_unique(et, supply);
    LinTyping ti = lina::jax_infer(eu);
    DeltaB db{supply, ti};
    return db.tangent(eu, theta);
}

// ----------------------------------------------------------- numseq_subst

TermPtr numseq_subst(const TermPtr& t,
                     const std::map<std::string, std::pair<NumSeq, TypePtr>>& env) {
    TermPtr out = t;
    for (auto& [name, nt] : env)
        out = subst_var(out, numseq_render(nt.first, nt.second), name);
    return out;
}

TypingEnv delta_env(const lina::JaxJudgment& j) {
    TypingEnv env;
    for (auto& [x, tau] : j.primal_env)
        env.push(pat::bangvar(x, ty::bang(trans_primal_type(tau))));
    return env;
}

TypePtr delta_result_type(const lina::JaxJudgment& j) {
    std::vector<TypePtr> ins;
    for (auto& [y, sigma] : j.tangent_env) ins.push_back(trans_tangent_type(sigma));
    return ty::tensor(ty::bang(trans_primal_type(j.primal_type)),
                      ty::sect(ty::arrow(with_seq_type(ins), trans_tangent_type(j.tangent_type))));
}

}  // namespace llad
