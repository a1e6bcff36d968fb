#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

namespace {
TypePtr R() { return ty::real(); }
}

TEST_CASE("equality at sequence types") {
    CHECK(eq_at_seq_type(mk::add(mk::num(1.0), mk::num(2.0)), mk::num(3.0), R()));
    CHECK_FALSE(eq_at_seq_type(mk::withpair(mk::num(1.0), mk::num(0.0)),
                               mk::withpair(mk::num(0.0), mk::num(1.0)), ty::with(R(), R())));
    CHECK_THROWS_AS(eq_at_seq_type(mk::num(1.0), mk::num(1.0), ty::arrow(R(), R())), user_error);
}

TEST_CASE("sampled equality at function types") {
    TermPtr idf = mk::lam(pat::var("u", R()), mk::var("u"));
    TermPtr zf = mk::lam(pat::var("u", R()), mk::num(0.0));
    auto verdict = eq_at_fun_type(idf, zf, ty::arrow(R(), R()), 50, 1234);
    CHECK_FALSE(verdict.equal_on_samples);
    CHECK(verdict.counterexample.has_value());
    // u +. 0 is the identity
    TermPtr plus0 = mk::lam(pat::var("u", R()), mk::add(mk::var("u"), mk::num(0.0)));
    CHECK(eq_at_fun_type(idf, plus0, ty::arrow(R(), R()), 50, 1234).equal_on_samples);
    // determinism from the seed
    auto v1 = eq_at_fun_type(idf, zf, ty::arrow(R(), R()), 50, 77);
    auto v2 = eq_at_fun_type(idf, zf, ty::arrow(R(), R()), 50, 77);
    REQUIRE(v1.counterexample.has_value());
    REQUIRE(v2.counterexample.has_value());
    CHECK(numseq_equal(*v1.counterexample, *v2.counterexample, 0.0));
}

TEST_CASE("skip unzipping on the running example") {
    auto art = run_pipeline(GenProgram{g_example(), {"x", "y"}});
    auto senv = scalar_env(art, {0.8, 1.2});
    PairValue a = eval_pair(numseq_subst(art.transposed, senv));
    PairValue b = eval_pair(numseq_subst(art.transposed_skip, senv));
    auto verdict = eq_at_fun_type(a.fn, b.fn, ty::arrow(R(), ty::with(R(), R())), 100, 555);
    CHECK(verdict.equal_on_samples);
}

TEST_CASE("finite differences") {
    auto sq = [](const std::vector<double>& v) { return v[0] * v[0]; };
    auto g1 = finite_diff_grad(sq, {3.0});
    CHECK(std::abs(g1[0] - 6.0) <= 1e-4);
    auto cons = [](const std::vector<double>&) { return 42.0; };
    CHECK(finite_diff_grad(cons, {1.0, 2.0})[1] == 0.0);
    auto gg = [](const std::vector<double>& v) { return g_value(v[0], v[1]); };
    auto gr = finite_diff_grad(gg, {1.5707963267948966, 2.0});
    CHECK(std::abs(gr[0] + 1.0) <= 1e-4);
    CHECK(std::abs(gr[1] - 1.0) <= 1e-4);
}

TEST_CASE("sigma equivalence instances under sampling") {
    // (lam p . ctx[N]) M  behaves like  ctx[(lam p . N) M] for an
    // exponential-safe context
    TermPtr m = mk::bang(mk::num(2.0));
    PatternPtr p = pat::bangvar("x", ty::bang(R()));
    TermPtr n = mk::add(mk::var("x"), mk::num(1.0));
    TermPtr lhs = mk::let_(p, m, mk::withpair(n, mk::num(7.0)));
    TermPtr rhs = mk::withpair(mk::let_(p, m, n), mk::num(7.0));
    CHECK(eq_at_seq_type(lhs, rhs, ty::with(R(), R())));
}

TEST_CASE("numeral sequence helpers") {
    NumSeq p = NumSeq::pair(NumSeq::scalar(1.0), NumSeq::pair(NumSeq::empty(), NumSeq::scalar(2.0)));
    CHECK(numseq_dim(p) == 2);
    std::vector<double> flat;
    numseq_flatten(p, flat);
    CHECK(flat == std::vector<double>{1.0, 2.0});
    NumSeq q = numseq_unflatten(p, {5.0, 6.0});
    CHECK(q.kids[0].value == 5.0);
    CHECK(numseq_dot(p, q) == 1.0 * 5.0 + 2.0 * 6.0);
    CHECK(numseq_to_string(p) == "(1, ((), 2))");
}
