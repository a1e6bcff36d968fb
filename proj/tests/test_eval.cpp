#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

TEST_CASE("numeric steps") {
    auto st = step_beta(mk::add(mk::num(1.5), mk::num(2.0)));
    REQUIRE(st.has_value());
    CHECK(st->second.kind == StepKind::BetaPlus);
    CHECK(st->first->value == 3.5);

    st = step_beta(mk::scale(mk::num(2.0), mk::num(3.0)));
    REQUIRE(st.has_value());
    CHECK(st->second.kind == StepKind::BetaTimes);
    CHECK(st->first->value == 6.0);

    st = step_beta(mk::app(mk::fun("sin"), mk::bang(mk::num(0.0))));
    REQUIRE(st.has_value());
    CHECK(st->second.kind == StepKind::BetaF);
    CHECK(term_equal(st->first, mk::bang(mk::num(0.0))));

    st = step_beta(mk::app(mk::fun("mul"), mk::pair(mk::bang(mk::num(3.0)), mk::bang(mk::num(4.0)))));
    REQUIRE(st.has_value());
    CHECK(term_equal(st->first, mk::bang(mk::num(12.0))));
}

TEST_CASE("safe reduction is call by closed strong value") {
    // call-by-value order: the argument reduces before the redex fires
    TermPtr body = mk::withpair(mk::var("x"), mk::var("x"));
    TermPtr lam = mk::lam(pat::var("x", ty::real()), body);
    TermPtr m = mk::app(lam, mk::add(mk::num(3.0), mk::num(2.0)));
    auto st = step_safe(m);
    REQUIRE(st.has_value());
    CHECK(st->second.kind == StepKind::BetaPlus);
    CHECK(term_equal(st->first, mk::app(lam, mk::num(5.0))));
    auto st2 = step_safe(st->first);
    REQUIRE(st2.has_value());
    CHECK(st2->second.kind == StepKind::BetaLam);
    CHECK(term_equal(st2->first, mk::withpair(mk::num(5.0), mk::num(5.0))));
    // beta would duplicate the redex instead
    auto stb = step_beta(m);
    REQUIRE(stb.has_value());
    CHECK(stb->second.kind == StepKind::BetaLam);
    // open arguments block beta_s
    TermPtr open = mk::app(mk::lam(pat::var("x", ty::real()), mk::var("x")), mk::var("y"));
    CHECK_FALSE(step_safe(open).has_value());
    CHECK(step_beta(open).has_value());
}

TEST_CASE("strong values") {
    CHECK(is_strong_value(mk::num(2.0)));
    CHECK(is_strong_value(mk::app(mk::dottimes(), mk::num(2.0))));
    CHECK_FALSE(is_strong_value(mk::add(mk::num(1.0), mk::num(2.0))));
    CHECK(is_strong_value(mk::lam(pat::var("x", ty::real()), mk::add(mk::var("x"), mk::var("x")))));
    CHECK(is_strong_value(mk::bang(mk::num(1.0))));
    CHECK(is_strong_value(mk::withpair(mk::num(1.0), mk::top())));
}

TEST_CASE("normalize") {
    auto r = normalize(mk::num(3.0), Strategy::Beta);
    CHECK(term_equal(r.term, mk::num(3.0)));
    CHECK(r.trace.flops == 0);

    // the running example primal at (pi/2, 2): four flops, result 2
    double x = 1.5707963267948966;
    std::map<std::string, std::pair<NumSeq, TypePtr>> senv{
        {"x", {NumSeq::scalar(x), ty::real()}}, {"y", {NumSeq::scalar(2.0), ty::real()}}};
    FreshSupply s;
    TermPtr t = numseq_subst(delta_b_primal(g_example(), s), senv);
    auto rr = normalize(t, Strategy::Safe);
    CHECK(rr.trace.flops == 4);
    REQUIRE(rr.term->kind == TermKind::Bang);
    CHECK(num_close(rr.term->a->value, 2.0, 1e-9));

    // dual_R unfolds to the scalar product
    TermPtr d = mk::app(mk::app(dual_term(ty::real(), s), mk::num(2.0)), mk::num(3.0));
    CHECK(num_close(eval_to_numseq(d).value, 6.0));
}

TEST_CASE("fuel exhaustion reports rather than spinning") {
    TermPtr m = mk::add(mk::num(1.0), mk::num(2.0));
    CHECK_THROWS_AS(normalize(m, Strategy::Beta, 0), user_error);
}

TEST_CASE("flops under a box are banked") {
    TermPtr t = mk::bang(mk::add(mk::num(1.0), mk::num(2.0)));
    auto r = normalize(t, Strategy::Beta);
    CHECK(r.trace.flops == 0);
    CHECK(r.trace.banked_flops == 1);
}

TEST_CASE("random reduction orders agree") {
    Rng root(23);
    for (int i = 0; i < 6; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr closed = numseq_subst(art.primal, scalar_env(art, xs));
        NumSeq expect = eval_to_numseq(closed);
        for (int ord = 0; ord < 10; ord++) {
            TermPtr cur = closed;
            Rng r2 = rng.fork(uint64_t(ord));
            for (int steps = 0; steps < 100000; steps++) {
                auto redexes = redex_positions(cur);
                if (redexes.empty()) break;
                cur = contract_at(cur, redexes[size_t(r2.pick(int(redexes.size())))]).first;
            }
            CHECK(numseq_equal(numseq_read(cur), expect, 1e-12));
        }
    }
}

TEST_CASE("safe strategy on safe closed terms reaches a strong value") {
    Rng root(31);
    for (int i = 0; i < 6; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr closed = numseq_subst(art.transposed, scalar_env(art, xs));
        auto r = normalize(closed, Strategy::Safe);
        CHECK(is_strong_value(r.term));
        CHECK(free_vars(r.term).empty());
    }
}

TEST_CASE("trace records paths and sizes") {
    TermPtr t = mk::add(mk::num(1.0), mk::add(mk::num(2.0), mk::num(3.0)));
    auto r = normalize(t, Strategy::Safe);
    REQUIRE(r.trace.steps.size() == 2);
    CHECK(r.trace.steps[0].redex_path == std::vector<int>{1, 1});
    CHECK(r.trace.steps[1].redex_path.empty());
    CHECK(r.trace.steps[1].term_size == 1);
}
