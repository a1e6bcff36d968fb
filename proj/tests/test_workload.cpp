#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

TEST_CASE("workload of types") {
    CHECK(workload_type(ty::real()) == 1);
    CHECK(workload_type(ty::bang(ty::real())) == 0);
    CHECK(workload_type(parse_type("(R & R) -o R")) == 3);
    CHECK(workload_type(ty::top()) == 0);
}

TEST_CASE("workload of terms") {
    CHECK(workload_term(mk::num(3.0)) == 0);
    CHECK(workload_term(g_translated()) == 4);
    // erasing a linear real costs its type
    CHECK(workload_term(mk::lam(pat::var("x", ty::real()), mk::num(0.0))) == 1);
    // W(S M) = W(M)
    TermPtr m = mk::add(mk::num(1.0), mk::num(2.0));
    CHECK(workload_term(mk::sect(m)) == workload_term(m));
    // sigma terms are free
    FreshSupply s;
    CHECK(workload_term(split_term({ty::real(), ty::real(), ty::real()}, {1}, s)) == 0);
    // +_H and *_H cost W(H)
    TypePtr h = ty::with(ty::real(), ty::with(ty::real(), ty::top()));
    CHECK(workload_term(plus_term(h, s)) == workload_type(h));
}

TEST_CASE("safety per the two conditions") {
    // (i) a box with workload
    auto bad = is_safe(mk::bang(mk::add(mk::num(1.0), mk::num(2.0))));
    CHECK_FALSE(bad.safe);
    CHECK(bad.violations.front().reason.find("!-box") != std::string::npos);
    // (ii) a shared higher-order variable
    std::unordered_map<std::string, TypePtr> ft{{"f", ty::arrow(ty::real(), ty::real())},
                                                {"y", ty::real()}};
    TermPtr shared = mk::withpair(mk::app(mk::var("f"), mk::var("y")),
                                  mk::app(mk::var("f"), mk::var("y")));
    auto bad2 = is_safe(shared, ft);
    CHECK_FALSE(bad2.safe);
    // ground sharing is fine
    TermPtr ok = mk::withpair(mk::var("y"), mk::var("y"));
    CHECK(is_safe(ok, ft).safe);
    // delta images are safe
    Rng root(5);
    for (int i = 0; i < 6; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::unordered_map<std::string, TypePtr> env;
        for (auto& [n, e] : art.theta) env[n] = ty::bang(e);
        CHECK(is_safe(art.primal, env).safe);
        CHECK(is_safe(art.fwd, env).safe);
        CHECK(is_safe(art.unzipped, env).safe);
        CHECK(is_safe(art.transposed, env).safe);
    }
}

TEST_CASE("flop bound checker") {
    double x = 1.5707963267948966;
    std::map<std::string, std::pair<NumSeq, TypePtr>> senv{
        {"x", {NumSeq::scalar(x), ty::real()}}, {"y", {NumSeq::scalar(2.0), ty::real()}}};
    FreshSupply s;
    TermPtr t = numseq_subst(delta_b_primal(g_example(), s), senv);
    auto rep = check_flop_bound(t);
    CHECK(rep.static_workload == 4);
    CHECK(rep.dynamic_flops == 4);
    CHECK(rep.holds);
    // preconditions
    CHECK_THROWS_AS(check_flop_bound(mk::var("x")), user_error);
    CHECK_THROWS_AS(check_flop_bound(mk::bang(mk::add(mk::num(1.0), mk::num(2.0)))), user_error);
}

TEST_CASE("substitution monotonicity for safe terms") {
    // W(M{W/p}) <= W(W) + W(M) on sampled instances
    Rng root(17);
    for (int i = 0; i < 8; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        auto senv = scalar_env(art, xs);
        std::size_t before = workload_term(art.transposed);
        TermPtr closed = numseq_subst(art.transposed, senv);
        CHECK(workload_term(closed) <= before);  // numerals have workload zero
    }
}

TEST_CASE("safeness is invariant along safe reduction") {
    Rng root(27);
    for (int i = 0; i < 4; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr cur = numseq_subst(art.transposed, scalar_env(art, xs));
        for (int steps = 0; steps < 10000; steps++) {
            auto st = step_safe(cur);
            if (!st) break;
            // safe terms never perform numeric work inside a box
            CHECK_FALSE((is_numeric_step(st->second.kind) && st->second.under_bang));
            cur = st->first;
            CHECK(is_safe(cur).safe);
        }
    }
}

TEST_CASE("workload is monotone along safe reduction") {
    Rng root(19);
    for (int i = 0; i < 6; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr cur = numseq_subst(art.fwd, scalar_env(art, xs));
        std::size_t w = workload_term(cur);
        for (int steps = 0; steps < 10000; steps++) {
            auto st = step_safe(cur);
            if (!st) break;
            cur = st->first;
            std::size_t w2 = workload_term(cur);
            if (is_numeric_step(st->second.kind) && !st->second.under_bang)
                CHECK(w2 < w);
            else
                CHECK(w2 <= w);
            w = w2;
        }
    }
}
