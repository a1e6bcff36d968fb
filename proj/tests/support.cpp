#include "support.hpp"

namespace llad::testing {

using namespace lina;

LinPtr g_example() {
    // let v1 = sin(x) in let v2 = mul(v1, y) in let v3 = cos(x) in
    // let v4 = add(v2, v3) in v4
    return le::let_prim(
        "v1", le::prim("sin", {"x"}),
        le::let_prim("v2", le::prim("mul", {"v1", "y"}),
                     le::let_prim("v3", le::prim("cos", {"x"}),
                                  le::let_prim("v4", le::prim("add", {"v2", "v3"}),
                                               le::prim_var("v4")))));
}

double g_value(double x, double y) { return std::sin(x) * y + std::cos(x); }

double g_dir(double x, double dx, double y, double dy) {
    return (std::cos(x) * y) * dx + std::sin(x) * dy - std::sin(x) * dx;
}

std::pair<double, double> g_grad(double x, double y, double zbar) {
    return {zbar * (y * std::cos(x) - std::sin(x)), std::sin(x) * zbar};
}

TermPtr g_translated() {
    auto br = ty::bang(ty::real());
    auto bv = [&](const std::string& n) { return pat::bangvar(n, br); };
    auto f1 = [&](const char* f, const char* x) { return mk::app(mk::fun(f), mk::bang(mk::var(x))); };
    auto f2 = [&](const char* f, const char* a, const char* b) {
        return mk::app(mk::fun(f), mk::pair(mk::bang(mk::var(a)), mk::bang(mk::var(b))));
    };
    return mk::let_(bv("v1"), f1("sin", "x"),
           mk::let_(bv("v2"), f2("mul", "v1", "y"),
           mk::let_(bv("v3"), f1("cos", "x"),
           mk::let_(bv("v4"), f2("add", "v2", "v3"), mk::bang(mk::var("v4"))))));
}

// ------------------------------------------------------------------- corpus

GenProgram gen_primal(Rng& rng, int max_inputs, int max_lets) {
    GenProgram prog;
    int n = 1 + rng.pick(max_inputs);
    std::vector<std::string> vars;
    std::vector<double> bound;  // crude magnitude bound per variable
    for (int i = 0; i < n; i++) {
        prog.inputs.push_back("x" + std::to_string(i));
        vars.push_back(prog.inputs.back());
        bound.push_back(2.0);
    }
    struct Binding {
        std::string name;
        LinPtr rhs;
    };
    std::vector<Binding> lets;
    int m = 1 + rng.pick(max_lets);
    static const char* unary[] = {"sin", "cos", "neg", "exp"};
    static const char* binary[] = {"add", "sub", "mul"};
    for (int i = 0; i < m; i++) {
        std::string v = "v" + std::to_string(i);
        LinPtr rhs;
        double b = 0;
        for (int attempt = 0; attempt < 8 && !rhs; attempt++) {
            int c = rng.pick(10);
            if (c < 2) {
                double r = rng.uniform(-2.0, 2.0);
                rhs = le::num(r);
                b = std::abs(r);
            } else if (c < 6) {
                const char* f = unary[rng.pick(4)];
                size_t ia = size_t(rng.pick(int(vars.size())));
                double ba = bound[ia];
                if (std::string(f) == "exp") {
                    if (ba > 1.4) continue;  // keep exponentials tame
                    b = std::exp(ba);
                } else if (std::string(f) == "neg") {
                    b = ba;
                } else {
                    b = 1.0;
                }
                rhs = le::prim(f, {vars[ia]});
            } else {
                const char* f = binary[rng.pick(3)];
                size_t ia = size_t(rng.pick(int(vars.size())));
                size_t ib = size_t(rng.pick(int(vars.size())));
                if (ia == ib) continue;  // argument names must be distinct
                double ba = bound[ia], bb = bound[ib];
                b = std::string(f) == "mul" ? ba * bb : ba + bb;
                if (b > 256.0) continue;
                rhs = le::prim(f, {vars[ia], vars[ib]});
            }
        }
        if (!rhs) {
            rhs = le::prim("sin", {vars[size_t(rng.pick(int(vars.size())))]});
            b = 1.0;
        }
        lets.push_back({v, rhs});
        vars.push_back(v);
        bound.push_back(b);
    }
    // result: the last let-bound variable; dead bindings are eliminated so
    // the corpus stays inside the domain of the cost theorems
    std::unordered_set<std::string> needed{lets.back().name};
    std::vector<Binding> live;
    for (size_t i = lets.size(); i-- > 0;) {
        if (!needed.count(lets[i].name)) continue;
        live.push_back(lets[i]);
        std::unordered_set<std::string> names;
        lin_all_names(lets[i].rhs, names);
        for (auto& n : names) needed.insert(n);
    }
    LinPtr body = le::prim_var(lets.back().name);
    for (auto& b : live) body = le::let_prim(b.name, b.rhs, body);
    prog.expr = body;
    return prog;
}

PipelineArtifacts run_pipeline(const GenProgram& prog) {
    PipelineArtifacts art;
    art.prog = prog;
    art.judgment = jax_check(prog.expr);
    FreshSupply supply;
    art.primal = delta_b_primal(prog.expr, supply);
    for (auto& [x, tau] : art.judgment.primal_env)
        art.theta.emplace_back(x, trans_primal_type(tau));
    art.fwd = forward(art.primal, art.theta, supply);
    art.unzipped = unzip(art.fwd);
    art.transposed = transpose(art.unzipped, supply);
    art.transposed_skip = transpose(art.fwd, supply);
    return art;
}

double eval_reference(const GenProgram& prog, const std::map<std::string, double>& vals) {
    NumEnv primals;
    for (auto& [n, v] : vals) primals[n] = NumSeq::scalar(v);
    for (auto& n : prog.inputs)
        if (!primals.count(n)) primals[n] = NumSeq::scalar(0.0);
    return jax_eval(prog.expr, primals, {}).primal.value;
}

std::map<std::string, std::pair<NumSeq, TypePtr>> scalar_env(const PipelineArtifacts& art,
                                                             const std::vector<double>& xs) {
    std::map<std::string, std::pair<NumSeq, TypePtr>> env;
    for (size_t i = 0; i < art.theta.size(); i++)
        env[art.theta[i].first] = {NumSeq::scalar(xs[i]), art.theta[i].second};
    return env;
}

bool trace_preserves_type(const TypingEnv& env, const TermPtr& start, Strategy strategy,
                          std::size_t max_steps) {
    Judgment j0 = synth(env, start);
    TermPtr cur = start;
    for (std::size_t i = 0; i < max_steps; i++) {
        auto st = strategy == Strategy::Beta ? step_beta(cur) : step_safe(cur);
        if (!st) return true;
        cur = st->first;
        Judgment j = synth(env, cur);
        if (!type_equal(j.type, j0.type)) return false;
    }
    return true;
}

}  // namespace llad::testing
