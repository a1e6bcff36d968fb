#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

namespace {
TypingEnv env_of(std::vector<PatternPtr> pats) {
    TypingEnv env;
    for (auto& p : pats) env.push(p);
    return env;
}
TypePtr R() { return ty::real(); }
}  // namespace

TEST_CASE("specialised operator axioms") {
    // S rule
    CHECK(type_equal(synth({}, mk::dotplus()).type, ty::arrow(ty::with(R(), R()), R())));
    // M rule
    CHECK(type_equal(synth({}, mk::dottimes()).type, ty::arrow(R(), ty::arrow(R(), R()))));
    // eta-expansion of the S rule
    TermPtr eta = parse_term("lam <x : R, y : R> . (dot+ <x, y>)");
    CHECK(type_equal(synth({}, eta).type, ty::arrow(ty::with(R(), R()), R())));
}

TEST_CASE("multiplicative linearity") {
    TypingEnv env = env_of({pat::var("x", R())});
    CHECK_THROWS_AS(synth(env, mk::pair(mk::var("x"), mk::var("x"))), user_error);
    try {
        synth(env, mk::pair(mk::var("x"), mk::var("x")));
    } catch (const user_error& e) {
        CHECK(e.code == ErrCode::LinearityViolation);
    }
    // unused linear entries are rejected
    CHECK_THROWS_AS(synth(env, mk::num(3.0)), user_error);
    // a Var of !-type is not an exponential pattern
    TypingEnv envb = env_of({pat::var("y", ty::bang(R()))});
    try {
        synth(envb, mk::pair(mk::var("y"), mk::var("y")));
        FAIL("expected rejection");
    } catch (const user_error& e) {
        CHECK(e.code == ErrCode::NonExponentialDuplication);
    }
    // a true exponential entry shares fine
    TypingEnv envx = env_of({pat::bangvar("z", ty::bang(R()))});
    CHECK(type_equal(synth(envx, mk::pair(mk::bang(mk::var("z")), mk::bang(mk::var("z")))).type,
                     ty::tensor(ty::bang(R()), ty::bang(R()))));
}

TEST_CASE("additive sharing") {
    TypingEnv env = env_of({pat::var("x", R())});
    CHECK(type_equal(check_additive_sharing(env, mk::withpair(mk::var("x"), mk::var("x")),
                                            ty::with(R(), R()))
                         .type,
                     ty::with(R(), R())));
    // rule Z allows 0 under any environment
    CHECK(type_equal(synth(env, mk::withpair(mk::var("x"), mk::num(0.0))).type, ty::with(R(), R())));
    // higher-order additive sharing is typable (safety is a separate check)
    TypingEnv envf = env_of({pat::var("f", ty::arrow(R(), R()))});
    CHECK(type_equal(synth(envf, mk::withpair(mk::var("f"), mk::var("f"))).type,
                     ty::with(ty::arrow(R(), R()), ty::arrow(R(), R()))));
}

TEST_CASE("affine modality rules are derived") {
    // closed section
    TermPtr id = mk::lam(pat::var("u", R()), mk::var("u"));
    CHECK_NOTHROW(check_affine({}, mk::sect(id), ty::arrow(R(), R())));
    // S r needs every environment pattern exponential or affine
    TypingEnv envf = env_of({pat::var("f", ty::arrow(R(), R()))});
    CHECK_THROWS_AS(check_affine(envf, mk::sect(mk::var("f")), ty::arrow(R(), R())), user_error);
    // S w discharges an affine entry
    TypingEnv envs = env_of({pat::sect(pat::var("f", ty::arrow(R(), R())))});
    CHECK(type_equal(synth(envs, mk::unit()).type, ty::unit()));
    // S l uses the payload
    TermPtr use = mk::app(mk::var("f"), mk::num(2.0));
    CHECK(type_equal(synth(envs, use).type, R()));
}

TEST_CASE("unbound variables and mismatches") {
    try {
        synth({}, mk::var("nope"));
        FAIL("expected UnboundVar");
    } catch (const user_error& e) {
        CHECK(e.code == ErrCode::UnboundVar);
    }
    CHECK_THROWS_AS(synth({}, mk::app(mk::dotplus(), mk::num(1.0))), user_error);
    CHECK_THROWS_AS(check({}, mk::num(1.0), ty::top()), user_error);
}

TEST_CASE("numerals: R rule is closed, Z absorbs") {
    CHECK(type_equal(synth({}, mk::num(3.0)).type, R()));
    TypingEnv env = env_of({pat::var("x", R())});
    CHECK(type_equal(synth(env, mk::num(0.0)).type, R()));
    // a lambda erasing a linear real only types through 0
    CHECK_NOTHROW(synth({}, mk::lam(pat::var("x", R()), mk::num(0.0))));
    CHECK_THROWS_AS(synth({}, mk::lam(pat::var("x", R()), mk::num(3.0))), user_error);
}

TEST_CASE("promotion requires an exponential environment") {
    TypingEnv env = env_of({pat::var("x", R())});
    CHECK_THROWS_AS(synth(env, mk::bang(mk::var("x"))), user_error);
    TypingEnv envb = env_of({pat::bangvar("x", ty::bang(R()))});
    CHECK(type_equal(synth(envb, mk::bang(mk::var("x"))).type, ty::bang(R())));
}

TEST_CASE("derivations are deterministic and serialize") {
    auto g = g_example();
    auto j = lina::jax_check(g);
    FreshSupply s;
    TermPtr t = delta_b_primal(g, s);
    TypingEnv env = delta_env(j);
    Judgment a = synth(env, t);
    Judgment b = synth(env, t);
    CHECK(derivation_to_json(a.derivation) == derivation_to_json(b.derivation));
    CHECK(derivation_to_json(a.derivation).find("\"rule\"") != std::string::npos);
}

TEST_CASE("subject reduction along beta and safe traces") {
    double x = 0.3, y = 1.7;
    std::map<std::string, std::pair<NumSeq, TypePtr>> senv{
        {"x", {NumSeq::scalar(x), R()}}, {"y", {NumSeq::scalar(y), R()}}};
    FreshSupply s;
    TermPtr t = numseq_subst(delta_b_primal(g_example(), s), senv);
    CHECK(trace_preserves_type({}, t, Strategy::Safe));
    CHECK(trace_preserves_type({}, t, Strategy::Beta));
}

TEST_CASE("progress: closed normal forms are strong values") {
    Rng root(11);
    for (int i = 0; i < 5; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1, 1));
        TermPtr closed = numseq_subst(art.fwd, scalar_env(art, xs));
        auto nf = normalize(closed, Strategy::Beta);
        CHECK(!step_beta(nf.term).has_value());
        CHECK(is_strong_value(nf.term));
    }
}
