#pragma once

#include <string>
#include <vector>

#include "llad/common.hpp"
#include "llad/term.hpp"

namespace llad {

// A numeral sequence: nested tuple of doubles matching a sequence type
// (or a JAX type). Empty nodes stand for 1 / Top components.
struct NumSeq {
    enum class Kind { Scalar, Empty, Pair };
    Kind kind = Kind::Empty;
    double value = 0;
    std::vector<NumSeq> kids;  // exactly two when Pair

    static NumSeq scalar(double v) {
        NumSeq n;
        n.kind = Kind::Scalar;
        n.value = v;
        return n;
    }
    static NumSeq empty() { return NumSeq{}; }
    static NumSeq pair(NumSeq a, NumSeq b) {
        NumSeq n;
        n.kind = Kind::Pair;
        n.kids.push_back(std::move(a));
        n.kids.push_back(std::move(b));
        return n;
    }
};

bool numseq_equal(const NumSeq& a, const NumSeq& b, double tol = 1e-9);
std::string numseq_to_string(const NumSeq& n);
std::size_t numseq_dim(const NumSeq& n);
void numseq_flatten(const NumSeq& n, std::vector<double>& out);
NumSeq numseq_unflatten(const NumSeq& shape, const std::vector<double>& vals);
double numseq_dot(const NumSeq& a, const NumSeq& b);
NumSeq numseq_add(const NumSeq& a, const NumSeq& b);
NumSeq numseq_scale(double s, const NumSeq& a);

// Shape construction / conversion against llad types.
NumSeq numseq_zero_of(const TypePtr& t);  // scalars at each R (also under !)
NumSeq numseq_random_of(const TypePtr& t, Rng& rng, double lo = -2.0, double hi = 2.0);

// Renders the numeral sequence as the closed strong value of the given
// sequence type (! inserted where the type demands).
TermPtr numseq_render(const NumSeq& n, const TypePtr& t);
// Reads a normalized value of a sequence type back into a numeral sequence.
NumSeq numseq_read(const TermPtr& t);

}  // namespace llad
