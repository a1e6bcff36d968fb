#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

namespace {
void roundtrip(const TermPtr& t) {
    std::string printed = print_term(t);
    CAPTURE(printed);
    CHECK(term_equal(parse_term(printed), t));
}
}  // namespace

TEST_CASE("term surface forms") {
    CHECK(term_equal(parse_term("lam x : R . x"), mk::lam(pat::var("x", ty::real()), mk::var("x"))));
    CHECK(term_equal(parse_term("(dot+ <1.5, 2>)"),
                     mk::add(mk::num(1.5), mk::num(2.0))));
    CHECK(term_equal(parse_term("((dot* 2) 3)"), mk::scale(mk::num(2.0), mk::num(3.0))));
    CHECK(term_equal(parse_term("!(sin !0)"), mk::bang(mk::app(mk::fun("sin"), mk::bang(mk::num(0))))));
    CHECK(parse_term("<>")->kind == TermKind::Top);
    CHECK(parse_term("()")->kind == TermKind::Unit);
    // let p = N in M is ((lam p . M) N)
    TermPtr let = parse_term("let x : R = 3 in x");
    REQUIRE(let->kind == TermKind::App);
    CHECK(let->a->kind == TermKind::Lam);
    CHECK(term_equal(let, mk::let_(pat::var("x", ty::real()), mk::num(3.0), mk::var("x"))));
}

TEST_CASE("type surface forms and precedence") {
    CHECK(type_equal(parse_type("R & R -o R"),
                     ty::arrow(ty::with(ty::real(), ty::real()), ty::real())));
    CHECK(type_equal(parse_type("!R * !R -o !R"), fun_type("mul")));
    CHECK(type_equal(parse_type("1 & (R -o R)"), ty::sect(ty::arrow(ty::real(), ty::real()))));
    CHECK(type_equal(parse_type("R & R & R"),
                     ty::with(ty::real(), ty::with(ty::real(), ty::real()))));
    CHECK(type_equal(parse_type("Top"), ty::top()));
    for (auto s : {"R", "!R * !R", "(R & Top) -o R -o R", "!(R * 1)"}) {
        TypePtr t = parse_type(s);
        CHECK(type_equal(parse_type(print_type(t)), t));
    }
}

TEST_CASE("patterns parse with annotations") {
    TermPtr t = parse_term("lam (!x : !R, <(), f : R -o R>) . ()");
    REQUIRE(t->kind == TermKind::Lam);
    const PatternPtr& p = t->pat;
    REQUIRE(p->kind == PatKind::Tensor);
    CHECK(p->a->kind == PatKind::BangVar);
    CHECK(p->b->kind == PatKind::With);
    CHECK(p->b->a->kind == PatKind::Unit);
    // !-patterns must carry !-types
    CHECK_THROWS_AS(parse_term("lam !x : R . x"), user_error);
}

TEST_CASE("round trip through the printer") {
    roundtrip(g_translated());
    Rng root(7);
    for (int i = 0; i < 10; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        roundtrip(art.primal);
        roundtrip(art.fwd);
        roundtrip(art.unzipped);
        roundtrip(art.transposed);
    }
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_term("lam x : R .");
        FAIL("expected a parse error");
    } catch (const user_error& e) {
        CHECK(e.code == ErrCode::Parse);
        CHECK(std::string(e.what()).find("1:") != std::string::npos);
    }
}

TEST_CASE("numerals print readably and round trip") {
    for (double v : {0.0, 1.0, -1.5, 3.1415926535897931, 1e-9, 2.5e17}) {
        TermPtr t = mk::num(v);
        TermPtr r = parse_term(print_term(t));
        CHECK(r->value == v);
    }
}

TEST_CASE("linear a surface round trips") {
    auto rt = [&](const lina::LinPtr& e) {
        std::string s = lina::print_lin(e);
        CAPTURE(s);
        CHECK(lina::lin_equal(lina::parse_lin(s), e));
    };
    rt(g_example());
    rt(lina::parse_lin("let (x; y') = (a; b') in (x; y')"));
    rt(lina::parse_lin("dup(u')"));
    rt(lina::parse_lin("drop(mul(a, b))"));
    rt(lina::parse_lin("zero : R * R"));
    rt(lina::parse_lin("a *. u'"));
    rt(lina::parse_lin("u' +. v'"));
    rt(lina::parse_lin("let tupP(a, b) = z in tupP()"));
    rt(lina::parse_lin("let tupT(a', b') = z' in tupT(a', b')"));
    Rng root(9);
    for (int i = 0; i < 8; i++) {
        Rng rng = root.fork(uint64_t(i));
        GenProgram prog = gen_primal(rng);
        rt(prog.expr);
        std::map<std::string, std::string> phi;
        for (auto& [n, t2] : lina::jax_check(prog.expr).primal_env) phi[n] = "d" + n + "'";
        FreshSupply s;
        rt(lina::jax_forward(prog.expr, phi, s));
    }
}

TEST_CASE("tangent identifiers need a prime") {
    CHECK_THROWS_AS(lina::parse_lin("dup(u)"), user_error);
    CHECK_THROWS_AS(lina::parse_lin("u +. v"), user_error);
    CHECK_THROWS_AS(lina::parse_lin("a' *. u'"), user_error);
}
