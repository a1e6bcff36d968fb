#include "llad/eval.hpp"

#include "llad/syntax.hpp"

namespace llad {

bool is_strong_value(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Var:
        case TermKind::Num:
        case TermKind::Fun:
        case TermKind::DotPlus:
        case TermKind::DotTimes:
        case TermKind::Lam:
        case TermKind::Unit:
        case TermKind::Top: return true;
        case TermKind::Pair:
        case TermKind::WithPair: return is_strong_value(t->a) && is_strong_value(t->b);
        case TermKind::Bang: return is_strong_value(t->a);
        case TermKind::App:
            return t->a->kind == TermKind::DotTimes && is_strong_value(t->b);
    }
    return false;
}

namespace {

// Recognizes a root redex and contracts it. `safe` turns beta_lam into
// beta_s (closed strong value arguments only).
std::optional<std::pair<TermPtr, StepKind>> contract_root(const TermPtr& t, bool safe) {
    if (t->kind != TermKind::App) return std::nullopt;
    const TermPtr& f = t->a;
    const TermPtr& x = t->b;
    // beta+ : dot+ <r1, r2> -> r1 + r2
    if (f->kind == TermKind::DotPlus && x->kind == TermKind::WithPair &&
        x->a->kind == TermKind::Num && x->b->kind == TermKind::Num)
        return {{mk::num(x->a->value + x->b->value), StepKind::BetaPlus}};
    // beta* : dot* r1 r2 -> r1 * r2
    if (f->kind == TermKind::App && f->a->kind == TermKind::DotTimes &&
        f->b->kind == TermKind::Num && x->kind == TermKind::Num)
        return {{mk::num(f->b->value * x->value), StepKind::BetaTimes}};
    // betaF : f !r -> !f(r)  and  f (!r1, !r2) -> !f(r1, r2)
    if (f->kind == TermKind::Fun) {
        const FunInfo& fi = fun_info(f->name);
        if (fi.arity == 1 && x->kind == TermKind::Bang && x->a->kind == TermKind::Num)
            return {{mk::bang(mk::num(fun_eval(f->name, {x->a->value}))), StepKind::BetaF}};
        if (fi.arity == 2 && x->kind == TermKind::Pair && x->a->kind == TermKind::Bang &&
            x->a->a->kind == TermKind::Num && x->b->kind == TermKind::Bang &&
            x->b->a->kind == TermKind::Num)
            return {{mk::bang(mk::num(fun_eval(f->name, {x->a->a->value, x->b->a->value}))),
                     StepKind::BetaF}};
    }
    // beta_lam / beta_s
    if (f->kind == TermKind::Lam && is_value_for(x, f->pat)) {
        if (safe && !(is_strong_value(x) && free_vars(x).empty())) return std::nullopt;
        return {{subst(f->a, x, f->pat), StepKind::BetaLam}};
    }
    return std::nullopt;
}

struct Found {
    TermPtr term;
    StepKind kind;
    std::vector<int> path;
    bool under_bang;
};

// children(t): Lam -> {body}; Bang -> {a}; App/Pair/WithPair -> {a, b}
TermPtr rebuild(const TermPtr& t, int idx, const TermPtr& sub) {
    switch (t->kind) {
        case TermKind::Lam: return mk::lam(t->pat, sub);
        case TermKind::Bang: return mk::bang(sub);
        case TermKind::App: return idx == 0 ? mk::app(sub, t->b) : mk::app(t->a, sub);
        case TermKind::Pair: return idx == 0 ? mk::pair(sub, t->b) : mk::pair(t->a, sub);
        case TermKind::WithPair:
            return idx == 0 ? mk::withpair(sub, t->b) : mk::withpair(t->a, sub);
        default: throw internal_error("rebuild at leaf");
    }
}

int child_count(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Lam:
        case TermKind::Bang: return 1;
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair: return 2;
        default: return 0;
    }
}

TermPtr child(const TermPtr& t, int idx) {
    if (t->kind == TermKind::Lam || t->kind == TermKind::Bang) return t->a;
    return idx == 0 ? t->a : t->b;
}

// Outermost-first search (full beta).
std::optional<Found> find_outermost(const TermPtr& t, std::vector<int>& path, bool under_bang) {
    if (auto r = contract_root(t, false))
        return Found{r->first, r->second, path, under_bang};
    int n = child_count(t);
    for (int i = 0; i < n; i++) {
        path.push_back(i);
        auto sub = find_outermost(child(t, i), path, under_bang || t->kind == TermKind::Bang);
        if (sub) {
            sub->term = rebuild(t, i, sub->term);
            return sub;
        }
        path.pop_back();
    }
    return std::nullopt;
}

// Innermost-first search among enabled safe redexes.
std::optional<Found> find_innermost_safe(const TermPtr& t, std::vector<int>& path, bool under_bang) {
    int n = child_count(t);
    for (int i = 0; i < n; i++) {
        path.push_back(i);
        auto sub = find_innermost_safe(child(t, i), path, under_bang || t->kind == TermKind::Bang);
        if (sub) {
            sub->term = rebuild(t, i, sub->term);
            return sub;
        }
        path.pop_back();
    }
    if (auto r = contract_root(t, true))
        return Found{r->first, r->second, path, under_bang};
    return std::nullopt;
}

std::optional<std::pair<TermPtr, Step>> to_result(std::optional<Found> f) {
    if (!f) return std::nullopt;
    Step s{f->kind, f->path, term_size(f->term), f->under_bang};
    return {{f->term, s}};
}

void collect_redexes(const TermPtr& t, std::vector<int>& path, std::vector<std::vector<int>>& out) {
    if (contract_root(t, false)) out.push_back(path);
    int n = child_count(t);
    for (int i = 0; i < n; i++) {
        path.push_back(i);
        collect_redexes(child(t, i), path, out);
        path.pop_back();
    }
}

}  // namespace

std::optional<std::pair<TermPtr, Step>> step_beta(const TermPtr& t) {
    std::vector<int> path;
    return to_result(find_outermost(t, path, false));
}

std::optional<std::pair<TermPtr, Step>> step_safe(const TermPtr& t) {
    std::vector<int> path;
    return to_result(find_innermost_safe(t, path, false));
}

std::vector<std::vector<int>> redex_positions(const TermPtr& t) {
    std::vector<std::vector<int>> out;
    std::vector<int> path;
    collect_redexes(t, path, out);
    return out;
}

std::pair<TermPtr, Step> contract_at(const TermPtr& t, const std::vector<int>& path) {
    // rebuild along the path
    std::vector<TermPtr> spine;
    TermPtr cur = t;
    bool under_bang = false;
    for (int idx : path) {
        spine.push_back(cur);
        if (cur->kind == TermKind::Bang) under_bang = true;
        cur = child(cur, idx);
    }
    auto r = contract_root(cur, false);
    if (!r) throw internal_error("contract_at: no redex at path");
    TermPtr res = r->first;
    for (size_t i = path.size(); i-- > 0;) res = rebuild(spine[i], path[i], res);
    Step s{r->second, path, term_size(res), under_bang};
    return {res, s};
}

NormalizeResult normalize(const TermPtr& t, Strategy strategy, std::size_t fuel) {
    NormalizeResult out{t, {}};
    for (std::size_t i = 0; i < fuel; i++) {
        auto st = strategy == Strategy::Beta ? step_beta(out.term) : step_safe(out.term);
        if (!st) return out;
        out.term = st->first;
        out.trace.steps.push_back(st->second);
        if (is_numeric_step(st->second.kind)) {
            if (st->second.under_bang)
                out.trace.banked_flops++;
            else
                out.trace.flops++;
        }
    }
    throw user_error(ErrCode::FuelExhausted,
                     "normalization did not finish within the step budget");
}

}  // namespace llad
