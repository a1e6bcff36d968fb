#pragma once

#include <map>
#include <string>
#include <vector>

#include "llad/term.hpp"

namespace llad {

// Decorated types: arrows carry an additive degree k >= 1.
struct DecType;
using DecTypePtr = std::shared_ptr<const DecType>;

struct DecType {
    TypeKind kind;
    std::size_t k = 1;  // Arrow only
    DecTypePtr a, b;
};

DecTypePtr decorate(const TypePtr& t, std::size_t k = 1);  // all arrows at k
TypePtr erase(const DecTypePtr& t);
std::string print_dectype(const DecTypePtr& t);

// Decoration of a typing environment: pattern |-> (degree, decorated type),
// with degree pinned to 1 at bang and ground types.
struct DecEntry {
    PatternPtr pattern;
    std::size_t degree = 1;
    DecTypePtr type;
};

using Decoration = std::vector<DecEntry>;

bool degree_pinned(const TypePtr& t);  // bang or ground
std::size_t scale_degree(std::size_t k, std::size_t k2, const TypePtr& t);
std::size_t add_degree(std::size_t k1, std::size_t k2, const TypePtr& t);

Decoration env_scale(std::size_t k, const Decoration& d);
Decoration env_add(const Decoration& d1, const Decoration& d2);

struct QResult {
    std::size_t m = 0;            // workload index
    DecTypePtr type;
    std::map<std::string, std::size_t> degrees;  // binder -> observed additive usage
    bool quant_safe = true;       // every !-box derives at index 0
    std::vector<std::string> violations;
};

// Synthesizes the workload index and a minimally decorated type. The
// decoration supplies degrees and decorated types for free variables.
QResult qcheck(const Decoration& d, const TermPtr& t);

struct QStep {
    std::size_t m = 0;
    bool numeric = false;
};

struct QReductionReport {
    std::vector<QStep> ms;       // m before each state, first entry = initial
    bool monotone = true;        // non-increasing, strict on numeric steps
    bool quant_safe = true;
    std::size_t numeric_steps = 0;
    bool bound_holds = true;     // numeric steps <= initial m
};

// Replays safe reduction, re-deriving m at each step.
QReductionReport qsubject_reduction_check(const TermPtr& t, const Decoration& d = {});

}  // namespace llad
