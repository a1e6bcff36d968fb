#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::lina;
using namespace llad::testing;

namespace {
std::map<std::string, std::string> phi_for(const LinPtr& e) {
    std::map<std::string, std::string> phi;
    for (auto& [n, t] : jax_check(e).primal_env) phi[n] = "d" + n + "'";
    return phi;
}
}  // namespace

TEST_CASE("forward base cases") {
    FreshSupply s;
    // a single variable becomes a variable pair
    LinPtr fx = jax_forward(le::prim_var("x"), {{"x", "dx'"}}, s);
    CHECK(lin_alpha_equal(fx, le::var_pair("x", "dx'")));
    // a numeral pairs with the zero tangent
    LinPtr fr = jax_forward(le::num(3.5), {}, s);
    CHECK(lin_alpha_equal(fr, le::pair_e(le::num(3.5), le::zero(jt_real()))));
}

TEST_CASE("forward of the running example matches the worked structure") {
    FreshSupply s;
    LinPtr fj = jax_forward(g_example(), {{"x", "dx'"}, {"y", "dy'"}}, s);
    // dup chain for the shared input, then the four blocks
    LinPtr expect = parse_lin(
        "let a' = dup(dx') in let tupT(dx1', dx2') = a' in "
        "let (v1; v1') = (let w1 = cos(x) in let z1' = w1 *. dx1' in (sin(x); z1')) in "
        "let (v2; v2') = (let w2 = y in let w3 = v1 in let z2' = w2 *. v1' in "
        "let z3' = w3 *. dy' in (mul(v1, y); z2' +. z3')) in "
        "let (v3; v3') = (let w4 = (let d = sin(x) in neg(d)) in let z4' = w4 *. dx2' in "
        "(cos(x); z4')) in "
        "let (v4; v4') = (let w5 = 1 in let w6 = 1 in let z5' = w5 *. v2' in "
        "let z6' = w6 *. v3' in (add(v2, v3); z5' +. z6')) in (v4; v4')");
    CHECK(lin_alpha_equal(fj, expect));
    // the transformed program pairs the primal type with itself
    auto j = jax_check(fj);
    CHECK(j.primal_type->kind == JKind::Real);
    CHECK(j.tangent_type->kind == JKind::Real);
    REQUIRE(j.tangent_env.size() == 2);
}

TEST_CASE("forward soundness against finite differences") {
    Rng root(101);
    for (int i = 0; i < 25; i++) {
        Rng rng = root.fork(uint64_t(i));
        GenProgram prog = gen_primal(rng);
        auto phi = phi_for(prog.expr);
        FreshSupply s;
        LinPtr fj = jax_forward(prog.expr, phi, s);
        auto j = jax_check(prog.expr);
        std::map<std::string, double> vals;
        NumEnv P;
        std::vector<double> xs;
        for (auto& [n, t] : j.primal_env) {
            double v = rng.uniform(-1.5, 1.5);
            vals[n] = v;
            xs.push_back(v);
            P[n] = NumSeq::scalar(v);
        }
        auto gfun = [&](const std::vector<double>& pt) {
            std::map<std::string, double> m;
            size_t k = 0;
            for (auto& [n, t] : j.primal_env) m[n] = pt[k++];
            return eval_reference(prog, m);
        };
        auto fd = finite_diff_grad(gfun, xs);
        size_t k = 0;
        for (auto& [n, t] : j.primal_env) {
            NumEnv T;
            for (auto& [m2, dn] : phi) T[dn] = NumSeq::scalar(m2 == n ? 1.0 : 0.0);
            auto v = jax_eval(fj, P, T);
            CHECK(std::abs(v.tangent.value - fd[k]) <= 1e-4);
            CHECK(num_close(v.primal.value, eval_reference(prog, vals), 1e-9));
            k++;
        }
    }
}

TEST_CASE("unzipping produces linear B and preserves workload exactly") {
    Rng root(102);
    for (int i = 0; i < 20; i++) {
        Rng rng = root.fork(uint64_t(i));
        GenProgram prog = gen_primal(rng);
        FreshSupply s;
        LinPtr fj = jax_forward(prog.expr, phi_for(prog.expr), s);
        LinPtr uj = jax_unzip(fj, s);
        CHECK(is_linear_b(uj));
        CHECK(jax_workload(uj) == jax_workload(fj));
        // same semantics
        auto j = jax_check(fj);
        NumEnv P, T;
        for (auto& [n, t] : j.primal_env) P[n] = NumSeq::scalar(rng.uniform(-1.5, 1.5));
        for (auto& [n, t] : j.tangent_env) T[n] = NumSeq::scalar(rng.uniform(-2, 2));
        auto v1 = jax_eval(fj, P, T);
        auto v2 = jax_eval(uj, P, T);
        CHECK(numseq_equal(v1.primal, v2.primal, 1e-12));
        CHECK(numseq_equal(v1.tangent, v2.tangent, 1e-12));
    }
}

TEST_CASE("unzip clause samples") {
    FreshSupply s;
    LinPtr u1 = jax_unzip(le::dup("x'"), s);
    CHECK(lin_alpha_equal(u1, le::pair_e(le::tup_p0(), le::dup("x'"))));
    LinPtr u2 = jax_unzip(le::var_pair("x", "y'"), s);
    CHECK(lin_alpha_equal(u2, le::var_pair("x", "y'")));
}

TEST_CASE("transpose duality clauses") {
    FreshSupply s;
    // dup flips to a sum
    auto td = jax_transpose_canonical(le::pair_e(le::tup_p0(), le::dup("x'")), s);
    LinPtr expect = parse_lin("(tupP(); let tupT(z', w') = " + td.adjoint + " in z' +. w')");
    CHECK(lin_alpha_equal(td.expr, expect));
    // a sum flips to dup
    auto ts = jax_transpose_canonical(le::pair_e(le::tup_p0(), le::add("x'", "y'")), s);
    CHECK(lin_alpha_equal(ts.expr, le::pair_e(le::tup_p0(), le::dup(ts.adjoint))));
    // scaling is self adjoint
    auto tm = jax_transpose_canonical(le::pair_e(le::tup_p0(), le::scale("a", "y'")), s);
    CHECK(lin_alpha_equal(tm.expr, le::pair_e(le::tup_p0(), le::scale("a", tm.adjoint))));
    // zero flips to drop
    auto tz = jax_transpose_canonical(le::pair_e(le::tup_p0(), le::zero(jt_real())), s);
    CHECK(lin_alpha_equal(tz.expr,
                          le::pair_e(le::tup_p0(), le::drop(le::tan_var(tz.adjoint)))));
}

TEST_CASE("transpose satisfies the dot product identity and the cost bound") {
    Rng root(103);
    for (int i = 0; i < 20; i++) {
        Rng rng = root.fork(uint64_t(i));
        GenProgram prog = gen_primal(rng);
        FreshSupply s;
        LinPtr fj = jax_forward(prog.expr, phi_for(prog.expr), s);
        LinPtr uj = jax_unzip(fj, s);
        auto tj = jax_transpose_canonical(uj, s);
        CHECK(is_linear_b(tj.expr));
        // amortized workload: inputs are credited, the adjoint is charged
        std::size_t wt = jax_workload(tj.expr);
        std::size_t wd = jax_workload(uj);
        std::size_t wenv = 0;
        for (auto& [n, t] : tj.theta) wenv += jax_workload_type(t);
        CHECK(wt + wenv <= wd + jax_workload_type(tj.adjoint_type));
        // adjoint identity: <tangent(s), w> = <s, transposed(w)>
        auto j = jax_check(uj);
        NumEnv P;
        for (auto& [n, t] : j.primal_env) P[n] = NumSeq::scalar(rng.uniform(-1.5, 1.5));
        for (int k = 0; k < 5; k++) {
            NumEnv T;
            std::vector<double> svec;
            for (auto& [n, t] : tj.theta) {
                double v = rng.uniform(-2, 2);
                T[n] = NumSeq::scalar(v);
                svec.push_back(v);
            }
            double w = rng.uniform(-2, 2);
            auto fwd_out = jax_eval(uj, P, T);
            NumEnv TA{{tj.adjoint, NumSeq::scalar(w)}};
            auto back = jax_eval(tj.expr, P, TA);
            std::vector<double> bvec;
            numseq_flatten(back.tangent, bvec);
            double lhs = fwd_out.tangent.value * w;
            double rhs = 0;
            for (size_t q = 0; q < svec.size(); q++) rhs += svec[q] * bvec[q];
            CHECK(std::abs(lhs - rhs) <= 1e-9);
        }
    }
}

TEST_CASE("unzip workload identity on the corpus") {
    Rng root(104);
    for (int i = 0; i < 30; i++) {
        Rng rng = root.fork(uint64_t(i));
        GenProgram prog = gen_primal(rng);
        FreshSupply s;
        LinPtr fj = jax_forward(prog.expr, phi_for(prog.expr), s);
        CHECK(jax_workload(jax_unzip(fj, s)) == jax_workload(fj));
        // and the forward factor
        CHECK(jax_workload(fj) <= 6 * jax_workload(prog.expr));
    }
}
