#pragma once

#include <optional>
#include <vector>

#include "llad/term.hpp"

namespace llad {

// Numeric steps (betaF, beta+, beta*) are the flops.
enum class StepKind { BetaLam, BetaF, BetaPlus, BetaTimes };

inline bool is_numeric_step(StepKind k) { return k != StepKind::BetaLam; }

struct Step {
    StepKind kind;
    std::vector<int> redex_path;  // child indices from the root
    std::size_t term_size = 0;    // size after the step
    bool under_bang = false;
};

struct EvalTrace {
    std::vector<Step> steps;
    // Numeric steps outside any !-box; steps inside boxes are banked
    // separately since W(!M) = 0.
    std::size_t flops = 0;
    std::size_t banked_flops = 0;
};

enum class Strategy { Beta, Safe };

// Strong values: x | c | lam p.M | () | (W,W) | <> | <W,W> | !W | dot* W
bool is_strong_value(const TermPtr& t);

// One step of full beta reduction at the leftmost-outermost redex, with
// evaluation allowed in every subterm position; nullopt iff t is a
// beta-normal form.
std::optional<std::pair<TermPtr, Step>> step_beta(const TermPtr& t);

// One step of safe reduction: beta_lam fires only on closed strong values;
// redex selection is leftmost-innermost among enabled redexes.
std::optional<std::pair<TermPtr, Step>> step_safe(const TermPtr& t);

// All beta-redex positions in t (for randomized reduction orders).
std::vector<std::vector<int>> redex_positions(const TermPtr& t);
// Contracts the redex at the given position.
std::pair<TermPtr, Step> contract_at(const TermPtr& t, const std::vector<int>& path);

struct NormalizeResult {
    TermPtr term;
    EvalTrace trace;
};

NormalizeResult normalize(const TermPtr& t, Strategy strategy, std::size_t fuel = 10000000);

}  // namespace llad
