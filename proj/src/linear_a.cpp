#include "llad/linear_a.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <set>

namespace llad::lina {

// --------------------------------------------------------------------- types

JTPtr jt_real() {
    static JTPtr t = std::make_shared<JaxType>(JaxType{JKind::Real, nullptr, nullptr});
    return t;
}
JTPtr jt_one() {
    static JTPtr t = std::make_shared<JaxType>(JaxType{JKind::One, nullptr, nullptr});
    return t;
}
JTPtr jt_tensor(JTPtr a, JTPtr b) {
    return std::make_shared<JaxType>(JaxType{JKind::Tensor, std::move(a), std::move(b)});
}

bool jt_equal(const JTPtr& a, const JTPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    if (a->kind == JKind::Tensor) return jt_equal(a->a, b->a) && jt_equal(a->b, b->b);
    return true;
}

std::string print_jtype(const JTPtr& t) {
    switch (t->kind) {
        case JKind::Real: return "R";
        case JKind::One: return "1";
        case JKind::Tensor: {
            std::string a = print_jtype(t->a);
            if (t->a->kind == JKind::Tensor) a = "(" + a + ")";
            return a + " * " + print_jtype(t->b);
        }
    }
    return "";
}

std::size_t jax_workload_type(const JTPtr& t) {
    switch (t->kind) {
        case JKind::Real: return 1;
        case JKind::One: return 0;
        case JKind::Tensor: return jax_workload_type(t->a) + jax_workload_type(t->b);
    }
    return 0;
}

NumSeq numseq_zero_of(const JTPtr& t) {
    switch (t->kind) {
        case JKind::Real: return NumSeq::scalar(0.0);
        case JKind::One: return NumSeq::empty();
        case JKind::Tensor: return NumSeq::pair(numseq_zero_of(t->a), numseq_zero_of(t->b));
    }
    return NumSeq::empty();
}

NumSeq numseq_random_of(const JTPtr& t, Rng& rng, double lo, double hi) {
    switch (t->kind) {
        case JKind::Real: return NumSeq::scalar(rng.uniform(lo, hi));
        case JKind::One: return NumSeq::empty();
        case JKind::Tensor: {
            NumSeq a = numseq_random_of(t->a, rng, lo, hi);
            return NumSeq::pair(std::move(a), numseq_random_of(t->b, rng, lo, hi));
        }
    }
    return NumSeq::empty();
}

// --------------------------------------------------------------- constructors

namespace le {

namespace {
LinPtr node(LinExpr e) { return std::make_shared<LinExpr>(std::move(e)); }
LinExpr base(LKind k) {
    LinExpr e{};
    e.kind = k;
    return e;
}
}  // namespace

LinPtr var_pair(std::string x, std::string y) {
    auto e = base(LKind::VarPair);
    e.x = std::move(x);
    e.y = std::move(y);
    return node(std::move(e));
}
LinPtr let_pair(std::string x, std::string y, LinPtr e1, LinPtr e2) {
    auto e = base(LKind::LetPair);
    e.x = std::move(x);
    e.y = std::move(y);
    e.a = std::move(e1);
    e.b = std::move(e2);
    return node(std::move(e));
}
LinPtr tup_p0() { return node(base(LKind::TupP0)); }
LinPtr tup_p2(std::string x1, std::string x2) {
    auto e = base(LKind::TupP2);
    e.x = std::move(x1);
    e.y = std::move(x2);
    return node(std::move(e));
}
LinPtr let_tup_p0(std::string z, LinPtr b) {
    auto e = base(LKind::LetTupP0);
    e.z = std::move(z);
    e.a = std::move(b);
    return node(std::move(e));
}
LinPtr let_tup_p2(std::string x1, std::string x2, std::string z, LinPtr b) {
    auto e = base(LKind::LetTupP2);
    e.x = std::move(x1);
    e.y = std::move(x2);
    e.z = std::move(z);
    e.a = std::move(b);
    return node(std::move(e));
}
LinPtr tup_t0() { return node(base(LKind::TupT0)); }
LinPtr tup_t2(std::string y1, std::string y2) {
    auto e = base(LKind::TupT2);
    e.x = std::move(y1);
    e.y = std::move(y2);
    return node(std::move(e));
}
LinPtr let_tup_t0(std::string z, LinPtr b) {
    auto e = base(LKind::LetTupT0);
    e.z = std::move(z);
    e.a = std::move(b);
    return node(std::move(e));
}
LinPtr let_tup_t2(std::string y1, std::string y2, std::string z, LinPtr b) {
    auto e = base(LKind::LetTupT2);
    e.x = std::move(y1);
    e.y = std::move(y2);
    e.z = std::move(z);
    e.a = std::move(b);
    return node(std::move(e));
}
LinPtr num(double v) {
    auto e = base(LKind::Num);
    e.value = v;
    return node(std::move(e));
}
LinPtr prim(std::string fn, std::vector<std::string> args) {
    auto e = base(LKind::PrimApp);
    e.fn = std::move(fn);
    e.args = std::move(args);
    return node(std::move(e));
}
LinPtr zero(JTPtr ty) {
    auto e = base(LKind::Zero);
    e.ty = std::move(ty);
    return node(std::move(e));
}
LinPtr add(std::string x, std::string y) {
    auto e = base(LKind::Add);
    e.x = std::move(x);
    e.y = std::move(y);
    return node(std::move(e));
}
LinPtr scale(std::string x, std::string y) {
    auto e = base(LKind::Scale);
    e.x = std::move(x);
    e.y = std::move(y);
    return node(std::move(e));
}
LinPtr dup(std::string y) {
    auto e = base(LKind::Dup);
    e.y = std::move(y);
    return node(std::move(e));
}
LinPtr drop(LinPtr sub) {
    auto e = base(LKind::Drop);
    e.a = std::move(sub);
    return node(std::move(e));
}
LinPtr prim_var(std::string x) {
    auto e = base(LKind::PrimVar);
    e.x = std::move(x);
    return node(std::move(e));
}
LinPtr tan_var(std::string y) {
    auto e = base(LKind::TanVar);
    e.y = std::move(y);
    return node(std::move(e));
}
LinPtr let_prim(std::string x, LinPtr e1, LinPtr e2) {
    auto e = base(LKind::LetPrim);
    e.x = std::move(x);
    e.a = std::move(e1);
    e.b = std::move(e2);
    return node(std::move(e));
}
LinPtr let_tan(std::string y, LinPtr e1, LinPtr e2) {
    auto e = base(LKind::LetTan);
    e.y = std::move(y);
    e.a = std::move(e1);
    e.b = std::move(e2);
    return node(std::move(e));
}
LinPtr pair_e(LinPtr a, LinPtr b) {
    if (a->kind == LKind::PrimVar && b->kind == LKind::TanVar) return var_pair(a->x, b->y);
    auto e = base(LKind::PairE);
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}
LinPtr tup_pe(LinPtr a, LinPtr b) {
    if (a->kind == LKind::PrimVar && b->kind == LKind::PrimVar) return tup_p2(a->x, b->x);
    auto e = base(LKind::TupPE);
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}
LinPtr tup_te(LinPtr a, LinPtr b) {
    if (a->kind == LKind::TanVar && b->kind == LKind::TanVar) return tup_t2(a->y, b->y);
    auto e = base(LKind::TupTE);
    e.a = std::move(a);
    e.b = std::move(b);
    return node(std::move(e));
}

}  // namespace le

bool lin_equal(const LinPtr& a, const LinPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    if (a->x != b->x || a->y != b->y || a->z != b->z || a->fn != b->fn || a->value != b->value ||
        a->args != b->args)
        return false;
    if ((a->ty == nullptr) != (b->ty == nullptr)) return false;
    if (a->ty && !jt_equal(a->ty, b->ty)) return false;
    if ((a->a == nullptr) != (b->a == nullptr) || (a->b == nullptr) != (b->b == nullptr)) return false;
    if (a->a && !lin_equal(a->a, b->a)) return false;
    if (a->b && !lin_equal(a->b, b->b)) return false;
    return true;
}

// ------------------------------------------------------------ free variables

namespace {

struct FvAcc {
    std::vector<std::string> order;
    std::unordered_set<std::string> seen;
    void add(const std::string& n) {
        if (seen.insert(n).second) order.push_back(n);
    }
};

void fv_rec(const LinPtr& e, bool tangent, std::unordered_set<std::string> bound, FvAcc& acc);

void fv_use(const std::string& n, bool is_tan, bool want_tan,
            const std::unordered_set<std::string>& bound, FvAcc& acc) {
    if (is_tan == want_tan && !bound.count(n)) acc.add(n);
}

void fv_rec(const LinPtr& e, bool tangent, std::unordered_set<std::string> bound, FvAcc& acc) {
    switch (e->kind) {
        case LKind::VarPair:
            fv_use(e->x, false, tangent, bound, acc);
            fv_use(e->y, true, tangent, bound, acc);
            return;
        case LKind::LetPair: {
            fv_rec(e->a, tangent, bound, acc);
            bound.insert(e->x);
            bound.insert(e->y);
            fv_rec(e->b, tangent, bound, acc);
            return;
        }
        case LKind::TupP0:
        case LKind::TupT0:
        case LKind::Num:
        case LKind::Zero: return;
        case LKind::TupP2:
            fv_use(e->x, false, tangent, bound, acc);
            fv_use(e->y, false, tangent, bound, acc);
            return;
        case LKind::TupT2:
            fv_use(e->x, true, tangent, bound, acc);
            fv_use(e->y, true, tangent, bound, acc);
            return;
        case LKind::LetTupP0:
            fv_use(e->z, false, tangent, bound, acc);
            fv_rec(e->a, tangent, bound, acc);
            return;
        case LKind::LetTupP2: {
            fv_use(e->z, false, tangent, bound, acc);
            bound.insert(e->x);
            bound.insert(e->y);
            fv_rec(e->a, tangent, bound, acc);
            return;
        }
        case LKind::LetTupT0:
            fv_use(e->z, true, tangent, bound, acc);
            fv_rec(e->a, tangent, bound, acc);
            return;
        case LKind::LetTupT2: {
            fv_use(e->z, true, tangent, bound, acc);
            bound.insert(e->x);
            bound.insert(e->y);
            fv_rec(e->a, tangent, bound, acc);
            return;
        }
        case LKind::PrimApp:
            for (auto& a : e->args) fv_use(a, false, tangent, bound, acc);
            return;
        case LKind::Add:
            fv_use(e->x, true, tangent, bound, acc);
            fv_use(e->y, true, tangent, bound, acc);
            return;
        case LKind::Scale:
            fv_use(e->x, false, tangent, bound, acc);
            fv_use(e->y, true, tangent, bound, acc);
            return;
        case LKind::Dup: fv_use(e->y, true, tangent, bound, acc); return;
        case LKind::Drop: fv_rec(e->a, tangent, bound, acc); return;
        case LKind::PrimVar: fv_use(e->x, false, tangent, bound, acc); return;
        case LKind::TanVar: fv_use(e->y, true, tangent, bound, acc); return;
        case LKind::LetPrim: {
            fv_rec(e->a, tangent, bound, acc);
            bound.insert(e->x);
            fv_rec(e->b, tangent, bound, acc);
            return;
        }
        case LKind::LetTan: {
            fv_rec(e->a, tangent, bound, acc);
            bound.insert(e->y);
            fv_rec(e->b, tangent, bound, acc);
            return;
        }
        case LKind::PairE:
        case LKind::TupPE:
        case LKind::TupTE:
            fv_rec(e->a, tangent, bound, acc);
            fv_rec(e->b, tangent, bound, acc);
            return;
    }
}

}  // namespace

std::vector<std::string> fv_primal(const LinPtr& e) {
    FvAcc acc;
    fv_rec(e, false, {}, acc);
    return acc.order;
}

std::vector<std::string> fv_tangent(const LinPtr& e) {
    FvAcc acc;
    fv_rec(e, true, {}, acc);
    return acc.order;
}

void lin_all_names(const LinPtr& e, std::unordered_set<std::string>& out) {
    if (!e) return;
    if (!e->x.empty()) out.insert(e->x);
    if (!e->y.empty()) out.insert(e->y);
    if (!e->z.empty()) out.insert(e->z);
    for (auto& a : e->args) out.insert(a);
    lin_all_names(e->a, out);
    lin_all_names(e->b, out);
}

JTPtr JaxJudgment::primal_of(const std::string& x) const {
    for (auto& [n, t] : primal_env)
        if (n == x) return t;
    throw user_error(ErrCode::UnboundVar, "no primal variable " + x);
}

JTPtr JaxJudgment::tangent_of(const std::string& y) const {
    for (auto& [n, t] : tangent_env)
        if (n == y) return t;
    throw user_error(ErrCode::UnboundVar, "no tangent variable " + y);
}

}  // namespace llad::lina
