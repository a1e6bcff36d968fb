#include "llad/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "llad/ad.hpp"
#include "llad/equiv.hpp"
#include "llad/eval.hpp"
#include "llad/jax_ad.hpp"
#include "llad/linear_a.hpp"
#include "llad/quant.hpp"
#include "llad/seq.hpp"
#include "llad/syntax.hpp"
#include "llad/translate.hpp"
#include "llad/typecheck.hpp"
#include "llad/workload.hpp"

namespace llad {

namespace {

using nlohmann::json;

struct Input {
    bool is_lina = false;
    lina::LinPtr lin;
    TermPtr term;
    std::string path;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw user_error(ErrCode::Usage, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Input load(const std::string& path, const std::string& lang) {
    Input in;
    in.path = path;
    std::string text = read_file(path);
    bool lina_file = lang == "lina" ||
                     (lang.empty() && path.size() >= 5 && path.substr(path.size() - 5) == ".lina");
    if (lina_file) {
        in.is_lina = true;
        in.lin = lina::parse_lin(text);
    } else {
        in.term = parse_term(text);
    }
    return in;
}

std::map<std::string, double> parse_args_list(const std::string& spec) {
    std::map<std::string, double> out;
    if (spec.empty()) return out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw user_error(ErrCode::Usage, "bad --args entry (expected name=value): " + item);
        out[item.substr(0, eq)] = std::strtod(item.c_str() + eq + 1, nullptr);
    }
    return out;
}

uint64_t default_seed() {
    if (const char* s = std::getenv("LLAD_SEED")) return std::strtoull(s, nullptr, 10);
    return 20250917ull;
}

void emit(bool as_json, const json& j, const std::string& text) {
    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text << "\n";
}

// Builds the forward enumeration for a lambdaLL primal term: free variables
// default to scalar entries !x : !R.
FwdTheta default_theta(const TermPtr& t) {
    FwdTheta theta;
    for (auto& v : free_vars_ordered(t)) theta.emplace_back(v, ty::real());
    return theta;
}

struct LinaPipeline {
    lina::LinPtr ep;
    lina::JaxJudgment judgment;
    TermPtr primal_llt;   // delta_b image
    FwdTheta theta;       // entries !x : !E
};

LinaPipeline lina_pipeline(const lina::LinPtr& e, FreshSupply& supply) {
    if (!lina::is_primal_expr(e))
        throw user_error(ErrCode::NotPrimal,
                         "this pipeline starts from a purely primal Linear B expression");
    LinaPipeline p;
    p.ep = e;
    p.judgment = lina::jax_check(e);
    p.primal_llt = delta_b_primal(e, supply);
    for (auto& [x, tau] : p.judgment.primal_env)
        p.theta.emplace_back(x, trans_primal_type(tau));
    return p;
}

std::map<std::string, std::pair<NumSeq, TypePtr>> numeral_env(
    const FwdTheta& theta, const std::map<std::string, double>& args) {
    std::map<std::string, std::pair<NumSeq, TypePtr>> env;
    for (auto& [x, e] : theta) {
        auto it = args.find(x);
        if (it == args.end())
            throw user_error(ErrCode::Usage, "missing --args value for input '" + x + "'");
        if (e->kind != TypeKind::Real)
            throw user_error(ErrCode::Usage, "input '" + x + "' is not scalar; bind it via the API");
        env[x] = {NumSeq::scalar(it->second), e};
    }
    return env;
}

json judgment_json(const lina::JaxJudgment& j) {
    json out;
    out["primal_env"] = json::object();
    for (auto& [n, t] : j.primal_env) out["primal_env"][n] = lina::print_jtype(t);
    out["tangent_env"] = json::object();
    for (auto& [n, t] : j.tangent_env) out["tangent_env"][n] = lina::print_jtype(t);
    out["primal_type"] = lina::print_jtype(j.primal_type);
    out["tangent_type"] = lina::print_jtype(j.tangent_type);
    return out;
}

int cmd_check(const Input& in, bool as_json) {
    if (in.is_lina) {
        auto j = lina::jax_check(in.lin);
        std::string envp, envt;
        for (auto& [n, t] : j.primal_env) envp += (envp.empty() ? "" : ", ") + n + " : " + lina::print_jtype(t);
        for (auto& [n, t] : j.tangent_env) envt += (envt.empty() ? "" : ", ") + n + " : " + lina::print_jtype(t);
        emit(as_json, judgment_json(j),
             envp + "; " + envt + " |- _ : (" + lina::print_jtype(j.primal_type) + "; " +
                 lina::print_jtype(j.tangent_type) + ")");
        return 0;
    }
    Judgment j = synth(TypingEnv{}, in.term);
    json out;
    out["type"] = print_type(j.type);
    out["derivation"] = json::parse(derivation_to_json(j.derivation));
    emit(as_json, out, print_type(j.type));
    return 0;
}

int cmd_qcheck(const Input& in, bool as_json) {
    TermPtr t = in.term;
    Decoration dec;
    if (in.is_lina) {
        FreshSupply supply;
        t = delta(in.lin, supply);
        auto j = lina::jax_check(in.lin);
        for (auto& [x, tau] : j.primal_env) {
            TypePtr bt = ty::bang(trans_primal_type(tau));
            dec.push_back({pat::bangvar(x, bt), 1, decorate(bt)});
        }
    }
    QResult q = qcheck(dec, t);
    json out;
    out["m"] = q.m;
    out["decorated_type"] = print_dectype(q.type);
    out["degrees"] = json::object();
    for (auto& [n, k] : q.degrees) out["degrees"][n] = k;
    out["quantitatively_safe"] = q.quant_safe;
    if (!q.violations.empty()) out["violations"] = q.violations;
    emit(as_json, out,
         "m = " + std::to_string(q.m) + "  :  " + print_dectype(q.type) +
             (q.quant_safe ? "" : "  (not quantitatively safe)"));
    return 0;
}

int cmd_eval(const Input& in, const std::map<std::string, double>& args, bool trace,
             const std::string& strategy, bool as_json) {
    if (in.is_lina) {
        lina::NumEnv primals, tangents;
        auto j = lina::jax_check(in.lin);
        for (auto& [n, t] : j.primal_env) {
            auto it = args.find(n);
            if (it == args.end()) throw user_error(ErrCode::Usage, "missing --args value for " + n);
            primals[n] = NumSeq::scalar(it->second);
        }
        for (auto& [n, t] : j.tangent_env) {
            auto it = args.find(n);
            if (it == args.end()) throw user_error(ErrCode::Usage, "missing --args value for " + n);
            tangents[n] = NumSeq::scalar(it->second);
        }
        auto v = lina::jax_eval(in.lin, primals, tangents);
        json out;
        out["primal"] = numseq_to_string(v.primal);
        out["tangent"] = numseq_to_string(v.tangent);
        emit(as_json, out,
             "primal = " + numseq_to_string(v.primal) + "\ntangent = " + numseq_to_string(v.tangent));
        return 0;
    }
    std::map<std::string, std::pair<NumSeq, TypePtr>> env;
    for (auto& [k, v] : args) env[k] = {NumSeq::scalar(v), ty::real()};
    TermPtr t = numseq_subst(in.term, env);
    auto norm = normalize(t, strategy == "beta" ? Strategy::Beta : Strategy::Safe);
    json out;
    out["result"] = print_term(norm.term);
    out["flops"] = norm.trace.flops;
    out["banked_flops"] = norm.trace.banked_flops;
    if (trace) {
        json steps = json::array();
        for (auto& st : norm.trace.steps) {
            json s;
            switch (st.kind) {
                case StepKind::BetaLam: s["kind"] = "beta_lam"; break;
                case StepKind::BetaF: s["kind"] = "beta_f"; break;
                case StepKind::BetaPlus: s["kind"] = "beta_plus"; break;
                case StepKind::BetaTimes: s["kind"] = "beta_times"; break;
            }
            s["redex_path"] = st.redex_path;
            s["term_size"] = st.term_size;
            steps.push_back(s);
        }
        out["trace"] = steps;
    }
    emit(as_json || trace, out,
         print_term(norm.term) + "\nflops = " + std::to_string(norm.trace.flops));
    return 0;
}

int cmd_translate(const Input& in, bool use_delta_b, bool as_json) {
    if (!in.is_lina) throw user_error(ErrCode::Usage, "translate expects a Linear A/B file");
    FreshSupply supply;
    TermPtr t = use_delta_b ? delta_b(in.lin, supply) : delta(in.lin, supply);
    json out;
    out["term"] = print_term(t);
    emit(as_json, out, print_term(t));
    return 0;
}

TermPtr transform_chain(const Input& in, int stage, bool skip_unzip, FreshSupply& supply) {
    // stage: 1 forward, 2 unzip, 3 transpose
    TermPtr p;
    FwdTheta theta;
    if (in.is_lina) {
        LinaPipeline pipe = lina_pipeline(in.lin, supply);
        p = pipe.primal_llt;
        theta = pipe.theta;
    } else {
        p = in.term;
        theta = default_theta(p);
    }
    if (stage == 1) return forward(p, theta, supply);
    if (stage == 2) return unzip(forward(p, theta, supply));
    return grad_pipeline_term(p, theta, skip_unzip, supply);
}

int cmd_transform(const Input& in, int stage, bool skip_unzip, bool as_json) {
    FreshSupply supply;
    TermPtr t;
    if (!in.is_lina && stage == 2 && in.term->kind == TermKind::App) {
        // an .llt file holding an already-forward term can be unzipped directly
        try {
            t = unzip(in.term);
        } catch (const user_error&) {
            t = transform_chain(in, stage, false, supply);
        }
    } else {
        t = transform_chain(in, stage, skip_unzip, supply);
    }
    json out;
    out["term"] = print_term(t);
    emit(as_json, out, print_term(t));
    return 0;
}

int cmd_grad(const Input& in, const std::map<std::string, double>& args, bool skip_unzip,
             double cotangent, bool as_json) {
    FreshSupply supply;
    TermPtr p;
    FwdTheta theta;
    if (in.is_lina) {
        LinaPipeline pipe = lina_pipeline(in.lin, supply);
        p = pipe.primal_llt;
        theta = pipe.theta;
    } else {
        p = in.term;
        theta = default_theta(p);
    }
    TermPtr grad_term = grad_pipeline_term(p, theta, skip_unzip, supply);
    TermPtr closed = numseq_subst(grad_term, numeral_env(theta, args));
    PairValue pv = eval_pair(closed);
    NumSeq adj = apply_fn(pv.fn, NumSeq::scalar(cotangent), ty::real());
    std::vector<double> flat;
    numseq_flatten(adj, flat);
    json out;
    out["primal"] = numseq_to_string(pv.primal);
    out["gradient"] = json::object();
    std::string text = "primal = " + numseq_to_string(pv.primal) + "\ngradient:";
    for (size_t i = 0; i < theta.size() && i < flat.size(); i++) {
        out["gradient"][theta[i].first] = flat[i];
        text += "\n  d/d" + theta[i].first + " = " + fmt_double(flat[i]);
    }
    emit(as_json, out, text);
    return 0;
}

int cmd_workload(const Input& in, bool as_json) {
    json out;
    std::string text;
    if (in.is_lina) {
        FreshSupply supply;
        std::size_t wjax = lina::jax_workload(in.lin);
        TermPtr t = delta_b(in.lin, supply);
        std::size_t wt = workload_term(t);
        auto j = lina::jax_check(in.lin);
        std::unordered_map<std::string, TypePtr> ftypes;
        for (auto& [x, tau] : j.primal_env) ftypes[x] = trans_primal_type(tau);
        auto safety = is_safe(t, ftypes);
        out["jax_workload"] = wjax;
        out["translated_workload"] = wt;
        out["safe"] = safety.safe;
        text = "jax_workload = " + std::to_string(wjax) +
               "\ntranslated_workload = " + std::to_string(wt) +
               "\nsafe = " + (safety.safe ? "true" : "false");
    } else {
        TermPtr t = in.term;
        std::size_t w = workload_term(t);
        auto safety = is_safe(t);
        out["term_workload"] = w;
        out["safe"] = safety.safe;
        json viols = json::array();
        for (auto& v : safety.violations) viols.push_back(v.reason);
        out["violations"] = viols;
        text = "term_workload = " + std::to_string(w) + "\nsafe = " + (safety.safe ? "true" : "false");
        if (free_vars(t).empty()) {
            try {
                Judgment j = synth(TypingEnv{}, t);
                out["type_workload"] = workload_type(j.type);
                text += "\ntype_workload = " + std::to_string(workload_type(j.type));
            } catch (const user_error&) {
            }
            if (safety.safe) {
                auto rep = check_flop_bound(t);
                out["dynamic_flops"] = rep.dynamic_flops;
                out["bound_holds"] = rep.holds;
                text += "\ndynamic_flops = " + std::to_string(rep.dynamic_flops);
            }
        }
        if (!safety.safe) {
            for (auto& v : safety.violations) text += "\nviolation: " + v.reason;
        }
    }
    emit(as_json, out, text);
    return 0;
}

int cmd_oracle_check(const Input& in, std::size_t trials, uint64_t seed, bool as_json) {
    if (!in.is_lina)
        throw user_error(ErrCode::Usage, "oracle-check expects a Linear A/B primal program");
    FreshSupply supply;
    LinaPipeline pipe = lina_pipeline(in.lin, supply);
    const auto& penv = pipe.judgment.primal_env;
    Rng root(seed);

    auto eval_primal = [&](const std::vector<double>& xs) {
        lina::NumEnv primals;
        for (size_t i = 0; i < penv.size(); i++) primals[penv[i].first] = NumSeq::scalar(xs[i]);
        return lina::jax_eval(pipe.ep, primals, {}).primal.value;
    };

    TermPtr fwd = forward(pipe.primal_llt, pipe.theta, supply);
    TermPtr tru = transpose(unzip(fwd), supply);
    TermPtr trs = transpose(fwd, supply);

    bool fd_ok = true, dot_ok = true, skip_ok = true, db_ok = true;
    for (std::size_t trial = 0; trial < trials; trial++) {
        Rng rng = root.fork(trial);
        std::vector<double> xs;
        for (size_t i = 0; i < penv.size(); i++) xs.push_back(rng.uniform(-2.0, 2.0));
        std::map<std::string, std::pair<NumSeq, TypePtr>> env;
        for (size_t i = 0; i < penv.size(); i++)
            env[penv[i].first] = {NumSeq::scalar(xs[i]), pipe.theta[i].second};

        // forward tangent vs central differences
        PairValue fv = eval_pair(numseq_subst(fwd, env));
        std::vector<TypePtr> tin;
        for (auto& [n, e] : pipe.theta) tin.push_back(trans_tangent_of_tensor_seq(e));
        TypePtr lty = with_seq_type(tin);
        for (size_t i = 0; i < penv.size() && fd_ok; i++) {
            std::vector<double> dir(penv.size(), 0.0);
            dir[i] = 1.0;
            NumSeq tangent = apply_fn(fv.fn, numseq_unflatten(numseq_zero_of(lty), dir), lty);
            auto fd = finite_diff_grad(eval_primal, xs);
            if (std::abs(tangent.value - fd[i]) > 1e-4) fd_ok = false;
        }

        // dot-product identity and skip-unzipping agreement
        PairValue tv = eval_pair(numseq_subst(tru, env));
        PairValue sv = eval_pair(numseq_subst(trs, env));
        for (int k = 0; k < 5 && dot_ok; k++) {
            NumSeq sarr = numseq_random_of(lty, rng);
            double w = rng.uniform(-2.0, 2.0);
            NumSeq fwd_out = apply_fn(fv.fn, sarr, lty);
            NumSeq back = apply_fn(tv.fn, NumSeq::scalar(w), ty::real());
            NumSeq back2 = apply_fn(sv.fn, NumSeq::scalar(w), ty::real());
            if (std::abs(fwd_out.value * w - numseq_dot(sarr, back)) > 1e-9) dot_ok = false;
            if (!numseq_equal(back, back2, 1e-9)) skip_ok = false;
        }

        // delta vs delta_b at the same numerals
        FreshSupply s2;
        TermPtr d1 = delta(pipe.ep, s2);
        TermPtr d2 = delta_b(pipe.ep, s2);
        PairValue p1 = eval_pair(numseq_subst(d1, env));
        NumSeq p2 = eval_to_numseq(numseq_subst(d2, env));
        if (!numseq_equal(p1.primal, p2, 1e-9)) db_ok = false;
    }

    json out;
    out["seed"] = seed;
    out["trials"] = trials;
    out["forward_vs_finite_differences"] = fd_ok ? "equal_on_samples" : "counterexample";
    out["transpose_dot_product"] = dot_ok ? "equal_on_samples" : "counterexample";
    out["skip_unzip"] = skip_ok ? "equal_on_samples" : "counterexample";
    out["delta_vs_delta_b"] = db_ok ? "equal_on_samples" : "counterexample";
    bool all = fd_ok && dot_ok && skip_ok && db_ok;
    emit(as_json, out,
         std::string("forward_vs_finite_differences: ") + (fd_ok ? "ok" : "FAIL") +
             "\ntranspose_dot_product: " + (dot_ok ? "ok" : "FAIL") +
             "\nskip_unzip: " + (skip_ok ? "ok" : "FAIL") +
             "\ndelta_vs_delta_b: " + (db_ok ? "ok" : "FAIL"));
    return all ? 0 : 1;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
    CLI::App app{"llad: a linear-logic lambda calculus with AD transformations"};
    app.require_subcommand(1);

    std::string file, lang, argspec, strategy = "safe";
    bool as_json = false, trace = false, use_delta_b = false, skip_unzip = false;
    double cotangent = 1.0;
    std::size_t trials = 100;
    uint64_t seed = default_seed();

    auto add_common = [&](CLI::App* cmd, bool needs_file = true) {
        if (needs_file) cmd->add_option("file", file, "input program")->required();
        cmd->add_flag("--json", as_json, "machine-readable output");
        cmd->add_option("--lang", lang, "override language detection (lina|llt)");
    };

    CLI::App* c_check = app.add_subcommand("check", "type check a program");
    add_common(c_check);
    CLI::App* c_qcheck = app.add_subcommand("qcheck", "quantitative type check");
    add_common(c_qcheck);
    CLI::App* c_eval = app.add_subcommand("eval", "normalize / evaluate");
    add_common(c_eval);
    c_eval->add_option("--args", argspec, "bind free variables: x=1.5,y=2");
    c_eval->add_flag("--trace", trace, "emit the reduction trace");
    c_eval->add_option("--strategy", strategy, "beta|safe (default safe)");
    CLI::App* c_translate = app.add_subcommand("translate", "Linear A/B to lambdaLL");
    add_common(c_translate);
    c_translate->add_flag("--delta-b", use_delta_b, "use the Linear B translation");
    CLI::App* c_forward = app.add_subcommand("forward", "forward transformation");
    add_common(c_forward);
    CLI::App* c_unzip = app.add_subcommand("unzip", "unzipping transformation");
    add_common(c_unzip);
    CLI::App* c_transpose = app.add_subcommand("transpose", "transpose transformation");
    add_common(c_transpose);
    c_transpose->add_flag("--skip-unzip", skip_unzip, "transpose without the unzip pass");
    CLI::App* c_grad = app.add_subcommand("grad", "evaluate the gradient");
    add_common(c_grad);
    c_grad->add_option("--args", argspec, "bind inputs: x=1.5,y=2")->required();
    c_grad->add_flag("--skip-unzip", skip_unzip, "transpose without the unzip pass");
    c_grad->add_option("--cotangent", cotangent, "output cotangent (default 1.0)");
    CLI::App* c_workload = app.add_subcommand("workload", "static and dynamic cost");
    add_common(c_workload);
    CLI::App* c_oracle = app.add_subcommand("oracle-check", "numeric soundness oracles");
    add_common(c_oracle);
    c_oracle->add_option("--trials", trials, "number of sampled trials");
    c_oracle->add_option("--seed", seed, "sampling seed");

    std::vector<std::string> argv = args;
    std::vector<const char*> cargv;
    cargv.push_back("llad");
    for (auto& a : argv) cargv.push_back(a.c_str());

    try {
        app.parse(int(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Input in = load(file, lang);
        auto argmap = parse_args_list(argspec);
        if (c_check->parsed()) return cmd_check(in, as_json);
        if (c_qcheck->parsed()) return cmd_qcheck(in, as_json);
        if (c_eval->parsed()) return cmd_eval(in, argmap, trace, strategy, as_json);
        if (c_translate->parsed()) return cmd_translate(in, use_delta_b, as_json);
        if (c_forward->parsed()) return cmd_transform(in, 1, false, as_json);
        if (c_unzip->parsed()) return cmd_transform(in, 2, false, as_json);
        if (c_transpose->parsed()) return cmd_transform(in, 3, skip_unzip, as_json);
        if (c_grad->parsed()) return cmd_grad(in, argmap, skip_unzip, cotangent, as_json);
        if (c_workload->parsed()) return cmd_workload(in, as_json);
        if (c_oracle->parsed()) return cmd_oracle_check(in, trials, seed, as_json);
        throw user_error(ErrCode::Usage, "no subcommand selected");
    } catch (const user_error& e) {
        std::cerr << errcode_name(e.code) << ": " << e.what() << "\n";
        return 1;
    } catch (const internal_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace llad
