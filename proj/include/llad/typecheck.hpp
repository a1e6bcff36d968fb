#pragma once

#include <string>
#include <vector>

#include "llad/term.hpp"

namespace llad {

// A typing environment is a finite set of patterns with their types; no
// variable name may appear in two entries. Entries with a BangVar pattern
// form the exponential part and may be shared across multiplicative splits.
struct EnvEntry {
    PatternPtr pattern;
    TypePtr type;
};

class TypingEnv {
  public:
    TypingEnv() = default;
    static TypingEnv of(std::vector<EnvEntry> entries);

    // Adds an entry, flattening tensor patterns and dropping unit patterns.
    void push(const PatternPtr& p);
    void push(const PatternPtr& p, const TypePtr& t);

    const std::vector<EnvEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::vector<EnvEntry> bang_part() const;
    std::vector<EnvEntry> linear_part() const;

    std::string to_string() const;

  private:
    std::vector<EnvEntry> entries_;
};

struct Derivation {
    std::string rule;
    std::string env;
    std::string subject;
    std::string type;
    std::vector<Derivation> children;
};

struct Judgment {
    TypingEnv env;
    TermPtr subject;
    TypePtr type;
    Derivation derivation;
};

// Checks env |- t : expected under the linear discipline; the affine rules
// need no dedicated code since the affine modality is notation for 1 & A.
Judgment check(const TypingEnv& env, const TermPtr& t, const TypePtr& expected);

// Type synthesis; every binder is annotated so the type is determined.
Judgment synth(const TypingEnv& env, const TermPtr& t);

// &i against the same environment for both components; thin wrapper kept as
// a named entry point for the additive-contraction rule.
Judgment check_additive_sharing(const TypingEnv& env, const TermPtr& t, const TypePtr& expected);

// Checks t against the affine type 1 & a (derived rules).
Judgment check_affine(const TypingEnv& env, const TermPtr& t, const TypePtr& a);

std::string derivation_to_json(const Derivation& d);

}  // namespace llad
