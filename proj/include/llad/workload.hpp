#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "llad/eval.hpp"
#include "llad/term.hpp"

namespace llad {

// W(A): occurrences of R not under the scope of a !.
std::size_t workload_type(const TypePtr& a);

// W(M) per the defining equations; binder annotations supply the types of
// erased pattern variables.
std::size_t workload_term(const TermPtr& t);

struct SafetyViolation {
    std::vector<int> path;  // to the offending subterm
    std::string reason;
};

struct SafetyReport {
    bool safe = true;
    std::vector<SafetyViolation> violations;
};

// Def 4: (i) every !-box has workload 0; (ii) additive pairs share only
// ground variables. `free_types` supplies types for the term's free
// variables (bound variables are read off binders).
SafetyReport is_safe(const TermPtr& t,
                     const std::unordered_map<std::string, TypePtr>& free_types = {});

struct FlopBoundReport {
    std::size_t static_workload = 0;
    std::size_t dynamic_flops = 0;
    bool holds = false;
    TermPtr normal_form;
    EvalTrace trace;
};

// Runs safe reduction and compares observed numeric steps against W(t).
// Requires t safe and closed.
FlopBoundReport check_flop_bound(const TermPtr& t);

}  // namespace llad
