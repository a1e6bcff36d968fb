#include "llad/workload.hpp"

#include <functional>

#include "llad/syntax.hpp"

namespace llad {

std::size_t workload_type(const TypePtr& a) {
    switch (a->kind) {
        case TypeKind::Real: return 1;
        case TypeKind::Unit:
        case TypeKind::Top: return 0;
        case TypeKind::Bang: return 0;
        default: return workload_type(a->a) + workload_type(a->b);
    }
}

std::size_t workload_term(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Fun:
        case TermKind::DotPlus:
        case TermKind::DotTimes: return 1;
        case TermKind::Var:
        case TermKind::Bang:
        case TermKind::Unit:
        case TermKind::Top:
        case TermKind::Num: return 0;
        case TermKind::Lam: {
            std::size_t w = workload_term(t->a);
            auto fv = free_vars(t->a);
            // erased variables are charged at their pattern-component type,
            // so exponential components contribute nothing
            std::function<void(const PatternPtr&)> walk = [&](const PatternPtr& p) {
                switch (p->kind) {
                    case PatKind::Var:
                        if (!fv.count(p->name)) w += workload_type(p->type);
                        return;
                    case PatKind::BangVar:
                    case PatKind::Unit: return;
                    default:
                        walk(p->a);
                        walk(p->b);
                }
            };
            walk(t->pat);
            return w;
        }
        case TermKind::App:
        case TermKind::Pair:
        case TermKind::WithPair: return workload_term(t->a) + workload_term(t->b);
    }
    return 0;
}

namespace {

struct SafetyChecker {
    std::unordered_map<std::string, TypePtr> types;  // in-scope variable types
    SafetyReport report;

    void flag(const std::vector<int>& path, std::string reason) {
        report.safe = false;
        report.violations.push_back({path, std::move(reason)});
    }

    void run(const TermPtr& t, std::vector<int>& path) {
        switch (t->kind) {
            case TermKind::Bang: {
                std::size_t w = workload_term(t->a);
                if (w != 0)
                    flag(path, "!-box has workload " + std::to_string(w) + ": !" + print_term(t->a));
                path.push_back(0);
                run(t->a, path);
                path.pop_back();
                return;
            }
            case TermKind::WithPair: {
                auto fva = free_vars(t->a);
                auto fvb = free_vars(t->b);
                for (auto& v : fva) {
                    if (!fvb.count(v)) continue;
                    auto it = types.find(v);
                    if (it == types.end())
                        flag(path, "shared variable '" + v + "' has unknown type in <,>");
                    else if (!is_ground(it->second))
                        flag(path, "higher-order variable '" + v + "' shared across <,>");
                }
                descend(t, path);
                return;
            }
            case TermKind::Lam: {
                std::vector<std::pair<std::string, TypePtr>> binds;
                pattern_bindings(t->pat, binds);
                std::vector<std::pair<std::string, TypePtr>> saved;
                for (auto& [name, bty] : binds) {
                    auto it = types.find(name);
                    if (it != types.end()) saved.emplace_back(name, it->second);
                    types[name] = bty;
                }
                descend(t, path);
                for (auto& [name, _] : binds) types.erase(name);
                for (auto& [name, old] : saved) types[name] = old;
                return;
            }
            default: descend(t, path); return;
        }
    }

    void descend(const TermPtr& t, std::vector<int>& path) {
        auto go = [&](const TermPtr& sub, int i) {
            path.push_back(i);
            run(sub, path);
            path.pop_back();
        };
        switch (t->kind) {
            case TermKind::Lam:
            case TermKind::Bang: go(t->a, 0); return;
            case TermKind::App:
            case TermKind::Pair:
            case TermKind::WithPair:
                go(t->a, 0);
                go(t->b, 1);
                return;
            default: return;
        }
    }
};

}  // namespace

SafetyReport is_safe(const TermPtr& t, const std::unordered_map<std::string, TypePtr>& free_types) {
    SafetyChecker ck;
    ck.types = free_types;
    std::vector<int> path;
    ck.run(t, path);
    return ck.report;
}

FlopBoundReport check_flop_bound(const TermPtr& t) {
    if (!free_vars(t).empty())
        throw user_error(ErrCode::NotClosed, "flop-bound check needs a closed term");
    auto safety = is_safe(t);
    if (!safety.safe)
        throw user_error(ErrCode::NotSafe, "flop-bound check needs a safe term: " +
                                               safety.violations.front().reason);
    FlopBoundReport rep;
    rep.static_workload = workload_term(t);
    auto norm = normalize(t, Strategy::Safe);
    rep.dynamic_flops = norm.trace.flops;
    rep.holds = rep.dynamic_flops <= rep.static_workload;
    rep.normal_form = norm.term;
    rep.trace = std::move(norm.trace);
    return rep;
}

}  // namespace llad
