#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "support.hpp"

using namespace llad;
using namespace llad::testing;

namespace {
TypePtr R() { return ty::real(); }
}

TEST_CASE("forward base clauses") {
    FreshSupply s;
    // F(!x) keeps the primal and passes the tangent through
    TermPtr f = forward(mk::bang(mk::var("x")), {{"x", R()}}, s);
    CHECK(alpha_equal(f, parse_term("(!x, <(), lam u : R . u>)")));
    // F(!r) pairs with the zero map
    TermPtr fr = forward(mk::bang(mk::num(2.0)), {}, s);
    CHECK(alpha_equal(fr, parse_term("(!2, <(), lam u : Top . 0>)")));
}

TEST_CASE("forward of a function symbol") {
    FreshSupply s;
    TermPtr app = mk::app(mk::fun("mul"), mk::pair(mk::bang(mk::var("a")), mk::bang(mk::var("b"))));
    TermPtr f = forward(app, {{"a", R()}, {"b", R()}}, s);
    TermPtr expect = parse_term(
        "let !d1 : !R = !b in let !d2 : !R = !a in "
        "((mul (!a, !b)), <(), lam <u1 : R, u2 : R> . (dot+ <((dot* d1) u1), ((dot* d2) u2)>)>)");
    CHECK(alpha_equal(f, expect));
    // registry derivatives for mul are variables, so this instance costs 4;
    // the generic bound is 6 per unit of primal work
    CHECK(workload_term(f) == 4);
    CHECK(workload_term(f) <= 6 * workload_term(app));
    // a unary symbol with a costly derivative stays within 3n
    TermPtr capp = mk::app(mk::fun("cos"), mk::bang(mk::var("a")));
    TermPtr fc = forward(capp, {{"a", R()}}, s);
    CHECK(workload_term(fc) == 4);  // derivative let chain costs 2, f costs 1, scaling 1
    // a repeated argument shares the tangent component additively
    TermPtr rep = mk::app(mk::fun("mul"), mk::pair(mk::bang(mk::var("a")), mk::bang(mk::var("a"))));
    TermPtr frep = forward(rep, {{"a", R()}}, s);
    TypingEnv env;
    env.push(pat::bangvar("a", ty::bang(R())));
    CHECK(type_equal(synth(env, frep).type,
                     parse_type("!R * (1 & (R -o R))")));
    std::map<std::string, std::pair<NumSeq, TypePtr>> senv{{"a", {NumSeq::scalar(3.0), R()}}};
    PairValue pv = eval_pair(numseq_subst(frep, senv));
    CHECK(num_close(apply_fn(pv.fn, NumSeq::scalar(1.0), R()).value, 6.0));  // d(a*a) = 2a
}

TEST_CASE("forward of the running example behaves like the worked term") {
    auto art = run_pipeline(GenProgram{g_example(), {"x", "y"}});
    Rng rng(77);
    for (int k = 0; k < 10; k++) {
        double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2);
        double dx = rng.uniform(-2, 2), dy = rng.uniform(-2, 2);
        PairValue pv = eval_pair(numseq_subst(art.fwd, scalar_env(art, {x, y})));
        CHECK(num_close(pv.primal.value, g_value(x, y), 1e-9));
        TypePtr lty = ty::with(R(), R());
        NumSeq t = apply_fn(pv.fn, NumSeq::pair(NumSeq::scalar(dx), NumSeq::scalar(dy)), lty);
        CHECK(num_close(t.value, g_dir(x, dx, y, dy), 1e-9));
    }
}

TEST_CASE("unzip decomposition") {
    FreshSupply s;
    // a bare pair decomposes with an empty context
    TermPtr pr = parse_term("(!x, <(), lam u : R . u>)");
    UnzipDecomp d = unzip_decompose(pr);
    CHECK(d.frames.empty());
    CHECK(term_equal(unzip(pr), pr));
    // a primal let lands in the context
    TermPtr lt = parse_term("let !v : !R = (sin !x) in (!v, <(), lam u : R . u>)");
    UnzipDecomp d2 = unzip_decompose(lt);
    REQUIRE(d2.frames.size() == 1);
    CHECK(d2.frames[0].kind == UnzipDecomp::Frame::Kind::BangLet);
    CHECK(term_equal(unzip(lt), lt));
}

TEST_CASE("unzip keeps meaning and cost") {
    Rng root(78);
    for (int i = 0; i < 10; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        CHECK(workload_term(art.unzipped) <= workload_term(art.fwd));
        std::vector<double> xs;
        for (size_t k = 0; k < art.theta.size(); k++) xs.push_back(rng.uniform(-1.5, 1.5));
        auto senv = scalar_env(art, xs);
        PairValue a = eval_pair(numseq_subst(art.fwd, senv));
        PairValue b = eval_pair(numseq_subst(art.unzipped, senv));
        CHECK(numseq_equal(a.primal, b.primal, 1e-12));
        std::vector<TypePtr> tins;
        for (auto& [n, e] : art.theta) tins.push_back(trans_tangent_of_tensor_seq(e));
        TypePtr lty = with_seq_type(tins);
        NumSeq dir = numseq_random_of(lty, rng);
        CHECK(numseq_equal(apply_fn(a.fn, dir, lty), apply_fn(b.fn, dir, lty), 1e-12));
    }
}

TEST_CASE("mu term of the worked example") {
    FreshSupply s;
    PatternPtr p = pat::with(pat::with(pat::var("x", R()), pat::var("y", R())),
                             pat::with(pat::var("x", R()), pat::var("u", R())));
    Renaming a1, a2;
    a1.map = {{"x", "x1"}, {"y", "y1"}};
    a2.map = {{"x", "x2"}};
    TermPtr mu = mu_term(p, a1, a2, s);
    CHECK(print_term(mu) ==
          "lam <<<x1 : R, y1 : R>, x1 : R>, <x2 : R, x2 : R>> . "
          "<<(dot+ <x1, x2>), y1>, <(dot+ <x1, x2>), 0>>");
    // codomain overlap is rejected
    Renaming bad;
    bad.map = {{"y", "x1"}};
    CHECK_THROWS_AS(mu_term(p, a1, bad, s), user_error);
}

TEST_CASE("nu inserts zeros and sums only where needed") {
    FreshSupply s;
    PatternPtr u = pat::var("u", R());
    CHECK(term_equal(nu_term(u, {}, {}, s), mk::num(0.0)));
    Renaming id;
    id.map = {{"u", "u"}};
    CHECK(term_equal(nu_term(u, id, {}, s), mk::var("u")));
    CHECK(workload_term(mu_term(u, id, {}, s)) == 0);
    // the empty-domain mu is the constant zero with workload 0
    TermPtr mz = mu_term(u, {}, {}, s);
    CHECK(workload_term(mz) == 0);
}

TEST_CASE("renamings") {
    FreshSupply s;
    Renaming a;
    a.map = {{"x", "x1"}, {"y", "y1"}};
    PatternPtr p = pat::with(pat::with(pat::var("x", R()), pat::var("y", R())),
                             pat::with(pat::var("x", R()), pat::var("u", R())));
    // pattern renaming drops the components outside the domain
    PatternPtr rp = pattern_rename(p, a, s);
    CHECK(print_pattern(rp) == "<<x1 : R, y1 : R>, x1 : R>");
    // term renaming touches free occurrences only and keeps W
    TermPtr m = mk::add(mk::var("x"), mk::var("y"));
    TermPtr rm = term_rename(m, a);
    CHECK(term_equal(rm, mk::add(mk::var("x1"), mk::var("y1"))));
    CHECK(workload_term(rm) == workload_term(m));
}

TEST_CASE("transpose micro goldens") {
    FreshSupply s;
    CHECK(print_term(transpose_fun(mk::dotplus(), s)).substr(0, 4) == "lam ");
    TermPtr tplus = transpose_fun(mk::dotplus(), s);
    REQUIRE(tplus->kind == TermKind::Lam);
    CHECK(term_equal(tplus->a, mk::withpair(mk::var(tplus->pat->name), mk::var(tplus->pat->name))));
    // T(dot* x) is itself
    TermPtr sc = mk::app(mk::dottimes(), mk::var("x"));
    CHECK(term_equal(transpose_fun(sc, s), sc));
    // T of the dup image behaves like the sum
    TermPtr dupimg = mk::lam(pat::var("u", R()), mk::withpair(mk::var("u"), mk::var("u")));
    TermPtr tdup = transpose_fun(dupimg, s);
    NumSeq r = apply_fn(tdup, NumSeq::pair(NumSeq::scalar(3.0), NumSeq::scalar(4.0)),
                        ty::with(R(), R()));
    CHECK(num_close(r.value, 7.0));
    // T of the zero map behaves like drop
    TermPtr zimg = mk::lam(pat::var("u", R()), mk::num(0.0));
    TermPtr tz = transpose_fun(zimg, s);
    NumSeq rz = apply_fn(tz, NumSeq::scalar(5.0), R());
    CHECK(rz.value == 0.0);
}

TEST_CASE("gradients at the worked points") {
    auto art = run_pipeline(GenProgram{g_example(), {"x", "y"}});
    auto grad_at = [&](const TermPtr& t, double x, double y, double zbar) {
        PairValue pv = eval_pair(numseq_subst(t, scalar_env(art, {x, y})));
        NumSeq gseq = apply_fn(pv.fn, NumSeq::scalar(zbar), R());
        std::vector<double> flat;
        numseq_flatten(gseq, flat);
        return flat;
    };
    for (TermPtr t : {art.transposed, art.transposed_skip}) {
        auto g1 = grad_at(t, 1.5707963267948966, 2.0, 1.0);
        CHECK(num_close(g1[0], -1.0, 1e-9));
        CHECK(num_close(g1[1], 1.0, 1e-9));
        auto g2 = grad_at(t, 0.0, 3.0, 1.0);
        CHECK(num_close(g2[0], 3.0, 1e-9));
        CHECK(num_close(g2[1], 0.0, 1e-9));
        auto g3 = grad_at(t, 0.0, 3.0, 0.0);
        CHECK(num_close(g3[0], 0.0, 1e-9));
        CHECK(num_close(g3[1], 0.0, 1e-9));
    }
}

TEST_CASE("grad pipeline term matches its stages") {
    FreshSupply s;
    auto art = run_pipeline(GenProgram{g_example(), {"x", "y"}});
    TermPtr skip = grad_pipeline_term(art.primal, art.theta, true, s);
    TermPtr full = grad_pipeline_term(art.primal, art.theta, false, s);
    auto senv = scalar_env(art, {0.9, -1.1});
    PairValue a = eval_pair(numseq_subst(skip, senv));
    PairValue b = eval_pair(numseq_subst(full, senv));
    NumSeq ga = apply_fn(a.fn, NumSeq::scalar(1.0), R());
    NumSeq gb = apply_fn(b.fn, NumSeq::scalar(1.0), R());
    CHECK(numseq_equal(ga, gb, 1e-9));
}

TEST_CASE("basis and inner product") {
    TypePtr h = ty::with(R(), R());
    auto basis = basis_terms(h);
    REQUIRE(basis.size() == 2);
    CHECK(term_equal(basis[0], mk::withpair(mk::num(1.0), mk::num(0.0))));
    CHECK(term_equal(basis[1], mk::withpair(mk::num(0.0), mk::num(1.0))));
    FreshSupply s;
    TermPtr ip = inner_product_term(h, s);
    TermPtr applied = mk::app(ip, mk::pair(mk::withpair(mk::num(2.0), mk::num(3.0)),
                                           mk::withpair(mk::num(4.0), mk::num(5.0))));
    CHECK(num_close(eval_to_numseq(applied).value, 23.0));
}

TEST_CASE("dual transpose oracle agrees with the transpose on bases") {
    FreshSupply s;
    // identity map on R & R
    PatternPtr p = pat::with(pat::var("a", R()), pat::var("b", R()));
    TermPtr u = mk::withpair(mk::var("a"), mk::var("b"));
    TypePtr h = ty::with(R(), R());
    TermPtr oracle = dual_transpose_oracle(u, p, h, s);
    for (auto& v : basis_terms(h)) {
        NumSeq got = eval_to_numseq(mk::app(oracle, v));
        NumSeq expect = numseq_read(normalize(v, Strategy::Beta).term);
        CHECK(numseq_equal(got, expect, 1e-9));
    }
    // the contraction <v, v> from a single input behaves like the sum
    PatternPtr pv = pat::var("v", R());
    TermPtr uu = mk::withpair(mk::var("v"), mk::var("v"));
    TermPtr oracle2 = dual_transpose_oracle(uu, pv, h, s);
    NumSeq got = eval_to_numseq(mk::app(oracle2, mk::withpair(mk::num(3.0), mk::num(4.0))));
    CHECK(num_close(got.value, 7.0));
}

TEST_CASE("cost amortization and safety preservation") {
    Rng root(79);
    for (int i = 0; i < 10; i++) {
        Rng rng = root.fork(uint64_t(i));
        auto art = run_pipeline(gen_primal(rng));
        std::size_t wl = art.theta.size();  // W of the tangent input space
        CHECK(workload_term(art.transposed) + wl <= workload_term(art.unzipped) + 1);
        CHECK(workload_term(art.transposed_skip) + wl <= workload_term(art.fwd) + 1);
        std::unordered_map<std::string, TypePtr> env;
        for (auto& [n, e] : art.theta) env[n] = ty::bang(e);
        CHECK(is_safe(art.transposed, env).safe);
        CHECK(is_safe(art.transposed_skip, env).safe);
    }
}
