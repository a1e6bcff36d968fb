#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

namespace {
TypePtr R() { return ty::real(); }
TypePtr arrowRR() { return ty::arrow(R(), R()); }
}

TEST_CASE("environment scaling and addition") {
    DecEntry f{pat::var("f", arrowRR()), 2, decorate(arrowRR())};
    DecEntry x{pat::var("x", R()), 1, decorate(R())};
    Decoration d{f, x};
    Decoration scaled = env_scale(3, d);
    CHECK(scaled[0].degree == 6);
    CHECK(scaled[1].degree == 1);  // ground entries stay pinned
    CHECK(env_scale(1, d)[0].degree == 2);
    DecEntry f3{pat::var("f", arrowRR()), 3, decorate(arrowRR())};
    Decoration sum = env_add({f}, {f3});
    REQUIRE(sum.size() == 1);
    CHECK(sum[0].degree == 5);
    DecEntry g{pat::var("g", arrowRR()), 4, decorate(arrowRR())};
    CHECK(env_add({f}, {g}).size() == 2);
}

TEST_CASE("degree overflow is reported") {
    DecEntry f{pat::var("f", arrowRR()), (1u << 19), decorate(arrowRR())};
    CHECK_THROWS_AS(env_scale(8, {f}), user_error);
}

TEST_CASE("workload indices of the axioms") {
    CHECK(qcheck({}, mk::dotplus()).m == 1);
    CHECK(print_dectype(qcheck({}, mk::dotplus()).type) == "R & R -o^1 R");
    QResult id = qcheck({}, mk::lam(pat::var("x", R()), mk::var("x")));
    CHECK(id.m == 0);
    CHECK(print_dectype(id.type) == "R -o^1 R");
    CHECK(qcheck({}, mk::fun("mul")).m == 1);
}

TEST_CASE("the worked additive duplication example") {
    // (lam x . <x, x>) (dot+ <3, 2>)
    TermPtr m = mk::let_(pat::var("x", R()), mk::add(mk::num(3.0), mk::num(2.0)),
                         mk::withpair(mk::var("x"), mk::var("x")));
    QResult q = qcheck({}, m);
    CHECK(q.m == 1);
    CHECK(q.degrees.at("x") == 2);  // observed additive usage
    CHECK(print_dectype(q.type) == "R & R");
    // after a full beta step the index doubles, which safe reduction avoids
    TermPtr n = mk::withpair(mk::add(mk::num(3.0), mk::num(2.0)),
                             mk::add(mk::num(3.0), mk::num(2.0)));
    CHECK(qcheck({}, n).m == 2);
    auto rep = qsubject_reduction_check(m);
    REQUIRE(rep.ms.size() == 3);
    CHECK(rep.ms[0].m == 1);
    CHECK(rep.ms[1].m == 0);
    CHECK(rep.ms[2].m == 0);
    CHECK(rep.monotone);
    CHECK(rep.bound_holds);
}

TEST_CASE("numeric steps strictly decrease the index") {
    TermPtr t = mk::add(mk::num(1.0), mk::add(mk::num(2.0), mk::num(3.0)));
    auto rep = qsubject_reduction_check(t);
    CHECK(rep.numeric_steps == 2);
    CHECK(rep.monotone);
    CHECK(rep.bound_holds);
    // normal forms report no steps
    auto repn = qsubject_reduction_check(mk::num(4.0));
    CHECK(repn.ms.size() == 1);
    CHECK(repn.monotone);
}

TEST_CASE("quantitative safety spots boxed work") {
    QResult q = qcheck({}, mk::bang(mk::add(mk::num(1.0), mk::num(2.0))));
    CHECK_FALSE(q.quant_safe);
    CHECK(q.m == 0);  // boxed work is banked
    CHECK(qcheck({}, mk::bang(mk::num(1.0))).quant_safe);
}

TEST_CASE("erasure coherence with the syntactic workload") {
    Rng root(91);
    for (int i = 0; i < 10; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        Decoration dec;
        for (auto& [n, e] : art.theta)
            dec.push_back({pat::bangvar(n, ty::bang(e)), 1, decorate(ty::bang(e))});
        QResult q = qcheck(dec, art.primal);
        CHECK(type_equal(erase(q.type), synth(delta_env(art.judgment), art.primal).type));
        CHECK(q.m == workload_term(art.primal));
        CHECK(q.quant_safe);
    }
}

TEST_CASE("pipeline cost inequalities in the quantitative system") {
    Rng root(92);
    for (int i = 0; i < 10; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        Decoration dec;
        for (auto& [n, e] : art.theta)
            dec.push_back({pat::bangvar(n, ty::bang(e)), 1, decorate(ty::bang(e))});
        std::size_t mp = qcheck(dec, art.primal).m;
        std::size_t mf = qcheck(dec, art.fwd).m;
        std::size_t mu = qcheck(dec, art.unzipped).m;
        std::size_t mt = qcheck(dec, art.transposed).m;
        CHECK(mf <= 6 * mp);
        CHECK(mu <= mf);
        CHECK(mt + art.theta.size() <= mu + 1);
    }
}

TEST_CASE("safe reduction keeps the index monotone on pipeline programs") {
    Rng root(93);
    for (int i = 0; i < 4; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr closed = numseq_subst(art.primal, scalar_env(art, xs));
        auto rep = qsubject_reduction_check(closed);
        CHECK(rep.monotone);
        CHECK(rep.bound_holds);
        CHECK(rep.quant_safe);
    }
}
