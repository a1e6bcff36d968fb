#pragma once

#include <map>

#include "llad/linear_a.hpp"
#include "llad/typecheck.hpp"

namespace llad {

// Type translations: p() on primal JAX types, t() on tangent JAX types and,
// extended, on tensor-sequence types.
TypePtr trans_primal_type(const lina::JTPtr& t);
TypePtr trans_tangent_type(const lina::JTPtr& t);
TypePtr trans_tangent_of_tensor_seq(const TypePtr& e);  // t(R)=R, t(1)=Top, t(!D*!E)=t(D)&t(E)

// Documented helper for the retraction between primal data and boxed
// tangent data; stated at the promoted types, where both halves are
// derivable. Not used by the pipeline.
TermPtr retraction_section(const lina::JTPtr& tau, FreshSupply& supply);   // !p(tau) -o !t(tau)
TermPtr retraction_retract(const lina::JTPtr& tau, FreshSupply& supply);   // !t(tau) -o !p(tau)

// Full Linear A translation (desugars internally). theta must enumerate the
// free tangent variables of e; the result is typed per
//   !x1 : !p(tau1), ... |- delta(e) : !p(tau) * S((& t(sigma_i)) -o t(sigma))
TermPtr delta(const lina::LinPtr& e, const std::vector<std::pair<std::string, lina::JTPtr>>& theta,
              FreshSupply& supply);
// Canonical-theta convenience form.
TermPtr delta(const lina::LinPtr& e, FreshSupply& supply);

// Linear B translation, with the purely primal and purely tangent
// sub-translations also exposed.
TermPtr delta_b(const lina::LinPtr& d, const std::vector<std::pair<std::string, lina::JTPtr>>& theta,
                FreshSupply& supply);
TermPtr delta_b(const lina::LinPtr& d, FreshSupply& supply);
TermPtr delta_b_primal(const lina::LinPtr& ep, FreshSupply& supply);
TermPtr delta_b_tangent(const lina::LinPtr& et,
                        const std::vector<std::pair<std::string, lina::JTPtr>>& theta,
                        FreshSupply& supply);

// ------------------------------- lambda-LL^A sorts -------------------------

enum class Sort { P, U, F, R };

struct SortedTerm {
    Sort sort;
    TermPtr term;
};

// Variable roles for free variables when sorting open terms.
enum class VarRole { Primal, Tangent, TanFun };

// Assigns a sort per the 4-sorted grammar or throws SortError.
SortedTerm sort_check(const TermPtr& t, const std::map<std::string, VarRole>& free_roles = {});
bool in_sort(const TermPtr& t, Sort s, const std::map<std::string, VarRole>& free_roles = {});

// Substitutes numeral sequences for free variables; each variable is given
// with the type at which it occurs.
TermPtr numseq_subst(const TermPtr& t,
                     const std::map<std::string, std::pair<NumSeq, TypePtr>>& env);

// The typing environment of a delta image: !x_i : !p(tau_i).
TypingEnv delta_env(const lina::JaxJudgment& j);
// And its result type.
TypePtr delta_result_type(const lina::JaxJudgment& j);

}  // namespace llad
