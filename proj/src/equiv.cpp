#include "llad/equiv.hpp"

#include "llad/eval.hpp"
#include "llad/syntax.hpp"

namespace llad {

bool eq_at_seq_type(const TermPtr& m, const TermPtr& n, const TypePtr& ty, double tol) {
    if (!(is_with_seq(ty) || is_tensor_seq(ty) || is_ground(ty)))
        throw user_error(ErrCode::IllTyped, "extensional comparison needs a sequence type");
    NumSeq vm = eval_to_numseq(m);
    NumSeq vn = eval_to_numseq(n);
    return numseq_equal(vm, vn, tol);
}

FunEqVerdict eq_at_fun_type(const TermPtr& m, const TermPtr& n, const TypePtr& fun_ty,
                            std::size_t trials, uint64_t seed, double tol) {
    if (fun_ty->kind != TypeKind::Arrow)
        throw user_error(ErrCode::IllTyped, "sampled comparison needs an arrow type");
    FunEqVerdict verdict;
    verdict.seed = seed;
    Rng root(seed);
    for (std::size_t i = 0; i < trials; i++) {
        Rng trial = root.fork(i);
        NumSeq arg = numseq_random_of(fun_ty->a, trial);
        NumSeq va = apply_fn(m, arg, fun_ty->a);
        NumSeq vb = apply_fn(n, arg, fun_ty->a);
        if (!numseq_equal(va, vb, tol)) {
            verdict.equal_on_samples = false;
            verdict.counterexample = arg;
            return verdict;
        }
    }
    return verdict;
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& g,
                                     const std::vector<double>& point, double h) {
    std::vector<double> grad(point.size());
    for (size_t i = 0; i < point.size(); i++) {
        std::vector<double> hi = point, lo = point;
        hi[i] += h;
        lo[i] -= h;
        grad[i] = (g(hi) - g(lo)) / (2 * h);
    }
    return grad;
}

NumSeq eval_to_numseq(const TermPtr& t) {
    auto norm = normalize(t, Strategy::Beta);
    return numseq_read(norm.term);
}

PairValue eval_pair(const TermPtr& t) {
    auto norm = normalize(t, Strategy::Safe);
    const TermPtr& v = norm.term;
    if (v->kind != TermKind::Pair || v->b->kind != TermKind::WithPair ||
        v->b->a->kind != TermKind::Unit)
        throw user_error(ErrCode::ShapeMismatch,
                         "expected a (!P, S F) value, got " + print_term(v));
    return {numseq_read(v->a), v->b->b};
}

NumSeq apply_fn(const TermPtr& fn, const NumSeq& arg, const TypePtr& arg_ty) {
    return eval_to_numseq(mk::app(fn, numseq_render(arg, arg_ty)));
}

}  // namespace llad
