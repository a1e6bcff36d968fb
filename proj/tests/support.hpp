#pragma once

#include <cmath>
#include <vector>

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

namespace llad::testing {

// The running example g(x, y) = sin(x) * y + cos(x) as a purely primal
// Linear B expression, its analytic value, directional derivative and
// gradient.
lina::LinPtr g_example();
double g_value(double x, double y);
double g_dir(double x, double dx, double y, double dy);
std::pair<double, double> g_grad(double x, double y, double zbar);

// The expected translation of the running example (the let-chain over
// sin, mul, cos, add), built by hand.
TermPtr g_translated();

// A randomly generated, magnitude-bounded, purely primal straight-line
// program over n scalar inputs.
struct GenProgram {
    lina::LinPtr expr;
    std::vector<std::string> inputs;
};
GenProgram gen_primal(Rng& rng, int max_inputs = 4, int max_lets = 6);

// Everything the acceptance suite derives from one corpus program.
struct PipelineArtifacts {
    GenProgram prog;
    lina::JaxJudgment judgment;
    TermPtr primal;           // delta_b image, sort P
    FwdTheta theta;           // !x_i : !R entries
    TermPtr fwd;              // F(primal)
    TermPtr unzipped;         // U(F(primal))
    TermPtr transposed;       // T(U(F(primal)))
    TermPtr transposed_skip;  // T(F(primal))
};
PipelineArtifacts run_pipeline(const GenProgram& prog);

// Evaluates the program's primal semantics at a point (reference oracle).
double eval_reference(const GenProgram& prog, const std::map<std::string, double>& vals);

// Substitution environment binding the program inputs to the given scalars.
std::map<std::string, std::pair<NumSeq, TypePtr>> scalar_env(const PipelineArtifacts& art,
                                                             const std::vector<double>& xs);

// Re-typechecks every intermediate term of a reduction trace at the type of
// the initial term; returns false on the first failure.
bool trace_preserves_type(const TypingEnv& env, const TermPtr& start, Strategy strategy,
                          std::size_t max_steps = 100000);

}  // namespace llad::testing
