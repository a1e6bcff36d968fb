#include "llad/jax_ad.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace llad::lina {

namespace {

[[noreturn]] void err(ErrCode c, const std::string& msg) { throw user_error(c, msg); }

std::string fresh_tan(FreshSupply& s, const std::string& hint) {
    std::string base = hint;
    if (!base.empty() && base.back() == '\'') base.pop_back();
    if (auto h = base.find('#'); h != std::string::npos) base = base.substr(0, h);
    return s.fresh(base.empty() ? "w" : base) + "'";
}

// ------------------------------------------------------------------- forward

struct Fwd {
    FreshSupply& supply;

    LinPtr run(const LinPtr& e, std::map<std::string, std::string> phi) {
        switch (e->kind) {
            case LKind::PrimVar: return le::var_pair(e->x, tangent_of(phi, e->x));
            case LKind::Num: return le::pair_e(e, le::zero(jt_real()));
            case LKind::PrimApp: return fun_case(e, phi);
            case LKind::TupP0: return le::pair_e(le::tup_p0(), le::tup_t0());
            case LKind::TupP2:
                return le::pair_e(e, le::tup_t2(tangent_of(phi, e->x), tangent_of(phi, e->y)));
            case LKind::TupPE: {
                // name the components first
                std::string x = supply.fresh("v"), y = supply.fresh("v");
                return run(le::let_prim(x, e->a, le::let_prim(y, e->b, le::tup_p2(x, y))), phi);
            }
            case LKind::LetTupP0: {
                std::string w = tangent_of(phi, e->z);
                phi.erase(e->z);
                return le::let_tup_p0(e->z, le::let_tup_t0(w, run(e->a, phi)));
            }
            case LKind::LetTupP2: {
                std::string w = tangent_of(phi, e->z);
                phi.erase(e->z);
                std::string y1 = fresh_tan(supply, e->x), y2 = fresh_tan(supply, e->y);
                phi[e->x] = y1;
                phi[e->y] = y2;
                return le::let_tup_p2(e->x, e->y, e->z,
                                      le::let_tup_t2(y1, y2, w, run(e->a, phi)));
            }
            case LKind::Drop: return le::drop(run(e->a, phi));
            case LKind::LetPrim: return let_case(e, phi);
            default:
                err(ErrCode::NotPrimal, "forward transformation needs a purely primal expression");
        }
    }

    static std::string tangent_of(const std::map<std::string, std::string>& phi,
                                  const std::string& x) {
        auto it = phi.find(x);
        if (it == phi.end())
            err(ErrCode::NotPrimal, "no tangent sibling for primal variable '" + x + "'");
        return it->second;
    }

    LinPtr fun_case(const LinPtr& e, const std::map<std::string, std::string>& phi) {
        int n = int(e->args.size());
        std::vector<std::string> ws, zs;
        for (int i = 0; i < n; i++) {
            ws.push_back(supply.fresh("w"));
            zs.push_back(fresh_tan(supply, "z"));
        }
        LinPtr sum = le::tan_var(zs[0]);
        if (n == 2) sum = le::add(zs[0], zs[1]);
        LinPtr body = le::pair_e(le::prim(e->fn, e->args), sum);
        for (int i = n; i-- > 0;)
            body = le::let_tan(zs[size_t(i)],
                               le::scale(ws[size_t(i)], tangent_of(phi, e->args[size_t(i)])), body);
        for (int i = n; i-- > 0;)
            body = le::let_prim(ws[size_t(i)], jax_deriv(e->fn, i + 1, e->args, supply), body);
        return body;
    }

    LinPtr let_case(const LinPtr& e, const std::map<std::string, std::string>& phi) {
        auto fv1v = fv_primal(e->a);
        auto fv2v = fv_primal(e->b);
        std::set<std::string> fv1(fv1v.begin(), fv1v.end());
        std::set<std::string> fv2(fv2v.begin(), fv2v.end());
        fv2.erase(e->x);
        // shared variables, in first-occurrence order of the let expression
        std::vector<std::string> shared;
        for (auto& v : fv_primal(e)) {
            if (fv1.count(v) && fv2.count(v)) shared.push_back(v);
        }
        std::map<std::string, std::string> phi1, phi2;
        for (auto& v : fv1v)
            if (!fv2.count(v)) phi1[v] = tangent_of(phi, v);
        for (auto& v : fv2v)
            if (v != e->x && !fv1.count(v)) phi2[v] = tangent_of(phi, v);
        struct DupBind {
            std::string a, w, v, u;
        };
        std::vector<DupBind> dups;
        for (auto& z : shared) {
            DupBind d{fresh_tan(supply, "a"), fresh_tan(supply, z), fresh_tan(supply, z),
                      tangent_of(phi, z)};
            phi1[z] = d.w;
            phi2[z] = d.v;
            dups.push_back(d);
        }
        bool x_used = std::count(fv2v.begin(), fv2v.end(), e->x) > 0;
        std::string ytan = fresh_tan(supply, e->x);
        LinPtr inner;
        if (x_used) {
            phi2[e->x] = ytan;
            inner = run(e->b, phi2);
        } else {
            // the bound tangent must still be consumed
            std::string d = fresh_tan(supply, "d");
            inner = le::let_tan(d, le::drop(le::tan_var(ytan)), le::let_tup_t0(d, run(e->b, phi2)));
        }
        LinPtr out = le::let_pair(e->x, ytan, run(e->a, phi1), inner);
        for (size_t i = dups.size(); i-- > 0;) {
            const DupBind& d = dups[i];
            out = le::let_tan(d.a, le::dup(d.u), le::let_tup_t2(d.w, d.v, d.a, out));
        }
        return out;
    }
};

}  // namespace

LinPtr jax_deriv(const std::string& f, int i, const std::vector<std::string>& args,
                 FreshSupply& supply) {
    if (f == "sin") return le::prim("cos", {args[0]});
    if (f == "cos") {
        std::string t = supply.fresh("d");
        return le::let_prim(t, le::prim("sin", {args[0]}), le::prim("neg", {t}));
    }
    if (f == "exp") return le::prim("exp", {args[0]});
    if (f == "neg") return le::num(-1.0);
    if (f == "add") return le::num(1.0);
    if (f == "sub") return le::num(i == 1 ? 1.0 : -1.0);
    if (f == "mul") return le::prim_var(args[i == 1 ? 1 : 0]);
    err(ErrCode::UnboundVar, "no derivative for symbol: " + f);
}

LinPtr jax_forward(const LinPtr& ep, const std::map<std::string, std::string>& phi,
                   FreshSupply& supply) {
    if (!is_primal_expr(ep))
        err(ErrCode::NotPrimal, "forward transformation needs a purely primal expression");
    std::unordered_set<std::string> names;
    lin_all_names(ep, names);
    for (auto& n : names) supply.avoid(n);
    for (auto& [k, v] : phi) supply.avoid(v);
    Fwd fwd{supply};
    return fwd.run(ep, phi);
}

// ------------------------------------------------------------------ unzipping

namespace {

struct PrimFrame {
    enum class K { Let, TupP0, TupP2 } k;
    std::string x, y, z;
    LinPtr ep;  // Let
};

struct UzDecomp {
    std::vector<PrimFrame> frames;
    LinPtr ep;
    LinPtr et;
};

UzDecomp uz(const LinPtr& e);

// sequences a 1-typed tangent in front of a tangent expression
LinPtr seq_tan(FreshSupply& s, const LinPtr& t1, LinPtr t2) {
    if (t1->kind == LKind::TupT0) return t2;
    std::string w = fresh_tan(s, "w");
    return le::let_tan(w, t1, le::let_tup_t0(w, std::move(t2)));
}

// discards a 1-typed primal through the let stack
void discard_primal(FreshSupply& s, const LinPtr& ep, std::vector<PrimFrame>& frames) {
    if (ep->kind == LKind::TupP0) return;
    std::string w = s.fresh("w");
    frames.push_back({PrimFrame::K::Let, w, "", "", ep});
    frames.push_back({PrimFrame::K::TupP0, "", "", w, nullptr});
}

UzDecomp uz_sugar(const LinPtr& e, FreshSupply& s) {
    switch (e->kind) {
        case LKind::PrimVar: return {{}, e, le::tup_t0()};
        case LKind::TanVar: return {{}, le::tup_p0(), e};
        case LKind::LetPrim: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            frames.push_back({PrimFrame::K::Let, e->x, "", "", d1.ep});
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            return {std::move(frames), d2.ep, seq_tan(s, d1.et, d2.et)};
        }
        case LKind::LetTan: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            discard_primal(s, d1.ep, frames);
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            return {std::move(frames), d2.ep, le::let_tan(e->y, d1.et, d2.et)};
        }
        case LKind::PairE: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            discard_primal(s, d2.ep, frames);
            return {std::move(frames), d1.ep, seq_tan(s, d1.et, d2.et)};
        }
        case LKind::TupPE: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            return {std::move(frames), le::tup_pe(d1.ep, d2.ep),
                    seq_tan(s, d1.et, seq_tan(s, d2.et, le::tup_t0()))};
        }
        case LKind::TupTE: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            discard_primal(s, d1.ep, frames);
            discard_primal(s, d2.ep, frames);
            return {std::move(frames), le::tup_p0(), le::tup_te(d1.et, d2.et)};
        }
        default: throw internal_error("uz_sugar");
    }
}

FreshSupply* uz_supply = nullptr;

UzDecomp uz(const LinPtr& e) {
    switch (e->kind) {
        case LKind::PrimVar:
        case LKind::TanVar:
        case LKind::LetPrim:
        case LKind::LetTan:
        case LKind::PairE:
        case LKind::TupPE:
        case LKind::TupTE: return uz_sugar(e, *uz_supply);
        case LKind::VarPair: return {{}, le::prim_var(e->x), le::tan_var(e->y)};
        case LKind::LetPair: {
            UzDecomp d1 = uz(e->a);
            UzDecomp d2 = uz(e->b);
            std::vector<PrimFrame> frames = std::move(d1.frames);
            frames.push_back({PrimFrame::K::Let, e->x, "", "", d1.ep});
            for (auto& f : d2.frames) frames.push_back(std::move(f));
            return {std::move(frames), d2.ep, le::let_tan(e->y, d1.et, d2.et)};
        }
        case LKind::TupP0: return {{}, le::tup_p0(), le::tup_t0()};
        case LKind::TupP2: return {{}, e, le::tup_t0()};
        case LKind::LetTupP0: {
            UzDecomp d = uz(e->a);
            std::vector<PrimFrame> frames;
            frames.push_back({PrimFrame::K::TupP0, "", "", e->z, nullptr});
            for (auto& f : d.frames) frames.push_back(std::move(f));
            return {std::move(frames), d.ep, d.et};
        }
        case LKind::LetTupP2: {
            UzDecomp d = uz(e->a);
            std::vector<PrimFrame> frames;
            frames.push_back({PrimFrame::K::TupP2, e->x, e->y, e->z, nullptr});
            for (auto& f : d.frames) frames.push_back(std::move(f));
            return {std::move(frames), d.ep, d.et};
        }
        case LKind::TupT0: return {{}, le::tup_p0(), le::tup_t0()};
        case LKind::TupT2: return {{}, le::tup_p0(), e};
        case LKind::LetTupT0: {
            UzDecomp d = uz(e->a);
            return {std::move(d.frames), d.ep, le::let_tup_t0(e->z, d.et)};
        }
        case LKind::LetTupT2: {
            UzDecomp d = uz(e->a);
            return {std::move(d.frames), d.ep, le::let_tup_t2(e->x, e->y, e->z, d.et)};
        }
        case LKind::Num:
        case LKind::PrimApp: return {{}, e, le::tup_t0()};
        case LKind::Zero:
        case LKind::Add:
        case LKind::Scale:
        case LKind::Dup: return {{}, le::tup_p0(), e};
        case LKind::Drop: {
            UzDecomp d = uz(e->a);
            return {std::move(d.frames), le::drop(d.ep), le::drop(d.et)};
        }
        default: throw internal_error("unzip on non-core expression");
    }
}

LinPtr rewrap(const std::vector<PrimFrame>& stack, LinPtr body) {
    for (size_t i = stack.size(); i-- > 0;) {
        const PrimFrame& f = stack[i];
        switch (f.k) {
            case PrimFrame::K::Let: body = le::let_prim(f.x, f.ep, std::move(body)); break;
            case PrimFrame::K::TupP0: body = le::let_tup_p0(f.z, std::move(body)); break;
            case PrimFrame::K::TupP2: body = le::let_tup_p2(f.x, f.y, f.z, std::move(body)); break;
        }
    }
    return body;
}

}  // namespace

LinPtr jax_unzip(const LinPtr& e, FreshSupply& supply) {
    LinPtr eu = lin_alpha_unique(e, supply);
    uz_supply = &supply;
    UzDecomp d = uz(eu);
    uz_supply = nullptr;
    return rewrap(d.frames, le::pair_e(d.ep, d.et));
}

// ------------------------------------------------------------------ transpose

namespace {

using Theta = std::vector<std::pair<std::string, JTPtr>>;

Theta restrict_theta(const Theta& theta, const LinPtr& e) {
    auto fv = fv_tangent(e);
    std::set<std::string> fvs(fv.begin(), fv.end());
    Theta out;
    for (auto& [n, t] : theta)
        if (fvs.count(n)) out.push_back({n, t});
    return out;
}

JTPtr tensor_of(const Theta& theta) {
    if (theta.empty()) return jt_one();
    JTPtr out = theta.back().second;
    for (size_t i = theta.size(); i-- > 1;) out = jt_tensor(theta[i - 1].second, out);
    return out;
}

struct Trans {
    FreshSupply& supply;
    const LinTyping& typing;

    // Binds the components of a bundle expression (of type tensor over
    // `comps`) to the given fresh names, then continues with `body`.
    LinPtr bind_components(LinPtr bundle, const std::vector<std::string>& comps, LinPtr body) {
        if (comps.empty()) {
            std::string w = fresh_tan(supply, "b");
            return le::let_tan(w, std::move(bundle), le::let_tup_t0(w, std::move(body)));
        }
        if (comps.size() == 1) return le::let_tan(comps[0], std::move(bundle), std::move(body));
        std::string w = fresh_tan(supply, "b");
        LinPtr out = std::move(body);
        // peel right-nested tuples front to back
        std::vector<std::string> cells;  // bundle cells c0 (c1 (...))
        cells.push_back(w);
        for (size_t i = 0; i + 2 < comps.size(); i++) cells.push_back(fresh_tan(supply, "b"));
        for (size_t i = comps.size() - 1; i-- > 0;) {
            const std::string& scrut = cells[i];
            const std::string& second = i + 2 == comps.size() ? comps[i + 1] : cells[i + 1];
            out = le::let_tup_t2(comps[i], second, scrut, std::move(out));
        }
        return le::let_tan(w, std::move(bundle), std::move(out));
    }

    static LinPtr tuple_of(const std::vector<LinPtr>& exprs) {
        if (exprs.empty()) return le::tup_t0();
        LinPtr out = exprs.back();
        for (size_t i = exprs.size(); i-- > 1;) out = le::tup_te(exprs[i - 1], out);
        return out;
    }

    JTPtr tan_type(const std::string& n) const {
        auto it = typing.tangent_types.find(n);
        if (it == typing.tangent_types.end())
            throw internal_error("no tangent type recorded for " + n);
        return it->second;
    }

    // Tangent expressions: theta restricted to FV^t(e), u the adjoint.
    LinPtr tangent(const LinPtr& e, const Theta& theta, const std::string& u) {
        switch (e->kind) {
            case LKind::TanVar: return le::tan_var(u);
            case LKind::Dup: {
                std::string z = fresh_tan(supply, "z"), w = fresh_tan(supply, "w");
                return le::let_tup_t2(z, w, u, le::add(z, w));
            }
            case LKind::Add: return le::dup(u);
            case LKind::Zero: return le::drop(le::tan_var(u));
            case LKind::Scale: return le::scale(e->x, u);
            case LKind::TupT0: return le::let_tup_t0(u, le::tup_t0());
            case LKind::Drop:
                return le::let_tup_t0(u, le::zero(tensor_of(theta)));
            case LKind::TupT2:
                return tangent_pair(le::tan_var(e->x), le::tan_var(e->y), theta, u);
            case LKind::TupTE: return tangent_pair(e->a, e->b, theta, u);
            case LKind::LetTan: {
                Theta th1 = restrict_theta(theta, e->a);
                Theta th2 = restrict_theta(theta, e->b);
                // remove the bound variable from th2 if it sneaked in
                Theta th2f;
                for (auto& p : th2)
                    if (p.first != e->y) th2f.push_back(p);
                std::string a = fresh_tan(supply, e->y);
                Theta th2x;
                th2x.push_back({e->y, tan_type(e->y)});
                for (auto& p : th2f) th2x.push_back(p);
                LinPtr t2 = tangent(e->b, th2x, u);
                std::vector<std::string> comps2;
                comps2.push_back(a);
                std::unordered_map<std::string, std::string> cname;
                for (auto& p : th2f) {
                    cname[p.first] = fresh_tan(supply, p.first);
                    comps2.push_back(cname[p.first]);
                }
                LinPtr t1 = tangent(e->a, th1, a);
                std::vector<std::string> comps1;
                for (auto& p : th1) {
                    cname[p.first] = fresh_tan(supply, p.first);
                    comps1.push_back(cname[p.first]);
                }
                std::vector<LinPtr> slots;
                for (auto& p : theta) slots.push_back(le::tan_var(cname.at(p.first)));
                return bind_components(t2, comps2,
                                       bind_components(t1, comps1, tuple_of(slots)));
            }
            case LKind::LetTupT0: {
                // the adjoint of the consumed unit variable is tupT()
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                LinPtr inner = tangent(e->a, thr, u);
                std::vector<std::string> comps;
                std::unordered_map<std::string, std::string> cname;
                for (auto& p : thr) {
                    cname[p.first] = fresh_tan(supply, p.first);
                    comps.push_back(cname[p.first]);
                }
                std::vector<LinPtr> slots;
                for (auto& p : theta)
                    slots.push_back(p.first == e->z ? le::tup_t0()
                                                    : LinPtr(le::tan_var(cname.at(p.first))));
                return bind_components(inner, comps, tuple_of(slots));
            }
            case LKind::LetTupT2: {
                Theta thr;
                for (auto& p : theta)
                    if (p.first != e->z) thr.push_back(p);
                Theta inner_theta;
                inner_theta.push_back({e->x, tan_type(e->x)});
                inner_theta.push_back({e->y, tan_type(e->y)});
                for (auto& p : thr) inner_theta.push_back(p);
                LinPtr inner = tangent(e->a, inner_theta, u);
                std::string c1 = fresh_tan(supply, e->x), c2 = fresh_tan(supply, e->y);
                std::vector<std::string> comps{c1, c2};
                std::unordered_map<std::string, std::string> cname;
                for (auto& p : thr) {
                    cname[p.first] = fresh_tan(supply, p.first);
                    comps.push_back(cname[p.first]);
                }
                std::vector<LinPtr> slots;
                for (auto& p : theta)
                    slots.push_back(p.first == e->z
                                        ? le::tup_te(le::tan_var(c1), le::tan_var(c2))
                                        : LinPtr(le::tan_var(cname.at(p.first))));
                return bind_components(inner, comps, tuple_of(slots));
            }
            default:
                err(ErrCode::NotSortR, "transpose hit a non-tangent expression: " + print_lin(e));
        }
    }

    LinPtr tangent_pair(const LinPtr& e1, const LinPtr& e2, const Theta& theta,
                        const std::string& u) {
        Theta th1 = restrict_theta(theta, e1);
        Theta th2 = restrict_theta(theta, e2);
        std::string u1 = fresh_tan(supply, "u"), u2 = fresh_tan(supply, "u");
        LinPtr t1 = tangent(e1, th1, u1);
        LinPtr t2 = tangent(e2, th2, u2);
        std::unordered_map<std::string, std::string> cname;
        std::vector<std::string> comps1, comps2;
        for (auto& p : th1) {
            cname[p.first] = fresh_tan(supply, p.first);
            comps1.push_back(cname[p.first]);
        }
        for (auto& p : th2) {
            cname[p.first] = fresh_tan(supply, p.first);
            comps2.push_back(cname[p.first]);
        }
        std::vector<LinPtr> slots;
        for (auto& p : theta) slots.push_back(le::tan_var(cname.at(p.first)));
        return le::let_tup_t2(
            u1, u2, u,
            bind_components(t1, comps1, bind_components(t2, comps2, tuple_of(slots))));
    }

    // Linear B level: the transpose commutes with the primal prefix.
    LinPtr run(const LinPtr& d, const Theta& theta, const std::string& u) {
        switch (d->kind) {
            case LKind::VarPair:
                return le::pair_e(le::prim_var(d->x), tangent(le::tan_var(d->y), theta, u));
            case LKind::PairE: return le::pair_e(d->a, tangent(d->b, theta, u));
            case LKind::LetPrim: return le::let_prim(d->x, d->a, run(d->b, theta, u));
            case LKind::LetTupP0: return le::let_tup_p0(d->z, run(d->a, theta, u));
            case LKind::LetTupP2: return le::let_tup_p2(d->x, d->y, d->z, run(d->a, theta, u));
            default:
                if (is_tangent_expr(d)) return tangent(d, theta, u);
                err(ErrCode::NotSortR, "transpose needs a Linear B expression");
        }
    }
};

}  // namespace

LinPtr jax_transpose(const LinPtr& d, const Theta& theta, const std::string& adjoint,
                     FreshSupply& supply) {
    if (!is_linear_b(d) && !is_tangent_expr(d))
        err(ErrCode::NotSortR, "transpose needs a Linear B expression");
    std::unordered_set<std::string> names;
    lin_all_names(d, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (!n.empty() && n.back() == '\'') supply.avoid(n.substr(0, n.size() - 1));
    }
    LinTyping typing = jax_infer(d);
    Trans tr{supply, typing};
    return tr.run(d, theta, adjoint);
}

JaxTransposed jax_transpose_canonical(const LinPtr& d, FreshSupply& supply) {
    LinTyping typing = jax_infer(d);
    JaxTransposed out;
    out.theta = typing.judgment.tangent_env;
    out.adjoint_type = typing.judgment.tangent_type;
    std::unordered_set<std::string> names;
    lin_all_names(d, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (!n.empty() && n.back() == '\'') supply.avoid(n.substr(0, n.size() - 1));
    }
    out.adjoint = fresh_tan(supply, "u");
    out.expr = jax_transpose(d, out.theta, out.adjoint, supply);
    return out;
}

}  // namespace llad::lina
