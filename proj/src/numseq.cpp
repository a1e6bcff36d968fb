#include "llad/numseq.hpp"

#include "llad/syntax.hpp"

namespace llad {

bool numseq_equal(const NumSeq& a, const NumSeq& b, double tol) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NumSeq::Kind::Scalar: return num_close(a.value, b.value, tol);
        case NumSeq::Kind::Empty: return true;
        case NumSeq::Kind::Pair:
            return numseq_equal(a.kids[0], b.kids[0], tol) && numseq_equal(a.kids[1], b.kids[1], tol);
    }
    return false;
}

std::string numseq_to_string(const NumSeq& n) {
    switch (n.kind) {
        case NumSeq::Kind::Scalar: return fmt_double(n.value);
        case NumSeq::Kind::Empty: return "()";
        case NumSeq::Kind::Pair:
            return "(" + numseq_to_string(n.kids[0]) + ", " + numseq_to_string(n.kids[1]) + ")";
    }
    return "";
}

std::size_t numseq_dim(const NumSeq& n) {
    switch (n.kind) {
        case NumSeq::Kind::Scalar: return 1;
        case NumSeq::Kind::Empty: return 0;
        case NumSeq::Kind::Pair: return numseq_dim(n.kids[0]) + numseq_dim(n.kids[1]);
    }
    return 0;
}

void numseq_flatten(const NumSeq& n, std::vector<double>& out) {
    switch (n.kind) {
        case NumSeq::Kind::Scalar: out.push_back(n.value); return;
        case NumSeq::Kind::Empty: return;
        case NumSeq::Kind::Pair:
            numseq_flatten(n.kids[0], out);
            numseq_flatten(n.kids[1], out);
            return;
    }
}

namespace {
NumSeq unflatten_rec(const NumSeq& shape, const std::vector<double>& vals, size_t& i) {
    switch (shape.kind) {
        case NumSeq::Kind::Scalar: return NumSeq::scalar(vals.at(i++));
        case NumSeq::Kind::Empty: return NumSeq::empty();
        case NumSeq::Kind::Pair: {
            NumSeq a = unflatten_rec(shape.kids[0], vals, i);
            NumSeq b = unflatten_rec(shape.kids[1], vals, i);
            return NumSeq::pair(std::move(a), std::move(b));
        }
    }
    return NumSeq::empty();
}
}  // namespace

NumSeq numseq_unflatten(const NumSeq& shape, const std::vector<double>& vals) {
    size_t i = 0;
    NumSeq out = unflatten_rec(shape, vals, i);
    if (i != vals.size()) throw internal_error("numseq_unflatten dimension mismatch");
    return out;
}

double numseq_dot(const NumSeq& a, const NumSeq& b) {
    std::vector<double> va, vb;
    numseq_flatten(a, va);
    numseq_flatten(b, vb);
    if (va.size() != vb.size())
        throw user_error(ErrCode::ShapeMismatch, "dot product of different dimensions");
    double s = 0;
    for (size_t i = 0; i < va.size(); i++) s += va[i] * vb[i];
    return s;
}

NumSeq numseq_add(const NumSeq& a, const NumSeq& b) {
    if (a.kind != b.kind) throw user_error(ErrCode::ShapeMismatch, "numseq add shape mismatch");
    switch (a.kind) {
        case NumSeq::Kind::Scalar: return NumSeq::scalar(a.value + b.value);
        case NumSeq::Kind::Empty: return NumSeq::empty();
        case NumSeq::Kind::Pair:
            return NumSeq::pair(numseq_add(a.kids[0], b.kids[0]), numseq_add(a.kids[1], b.kids[1]));
    }
    return NumSeq::empty();
}

NumSeq numseq_scale(double s, const NumSeq& a) {
    switch (a.kind) {
        case NumSeq::Kind::Scalar: return NumSeq::scalar(s * a.value);
        case NumSeq::Kind::Empty: return NumSeq::empty();
        case NumSeq::Kind::Pair:
            return NumSeq::pair(numseq_scale(s, a.kids[0]), numseq_scale(s, a.kids[1]));
    }
    return NumSeq::empty();
}

NumSeq numseq_zero_of(const TypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real: return NumSeq::scalar(0.0);
        case TypeKind::Unit:
        case TypeKind::Top: return NumSeq::empty();
        case TypeKind::Bang: return numseq_zero_of(t->a);
        case TypeKind::Tensor:
        case TypeKind::With: return NumSeq::pair(numseq_zero_of(t->a), numseq_zero_of(t->b));
        case TypeKind::Arrow:
            throw user_error(ErrCode::ShapeMismatch, "no numeral sequence at an arrow type");
    }
    return NumSeq::empty();
}

NumSeq numseq_random_of(const TypePtr& t, Rng& rng, double lo, double hi) {
    switch (t->kind) {
        case TypeKind::Real: return NumSeq::scalar(rng.uniform(lo, hi));
        case TypeKind::Unit:
        case TypeKind::Top: return NumSeq::empty();
        case TypeKind::Bang: return numseq_random_of(t->a, rng, lo, hi);
        case TypeKind::Tensor:
        case TypeKind::With: {
            NumSeq a = numseq_random_of(t->a, rng, lo, hi);
            return NumSeq::pair(std::move(a), numseq_random_of(t->b, rng, lo, hi));
        }
        case TypeKind::Arrow:
            throw user_error(ErrCode::ShapeMismatch, "no numeral sequence at an arrow type");
    }
    return NumSeq::empty();
}

TermPtr numseq_render(const NumSeq& n, const TypePtr& t) {
    switch (t->kind) {
        case TypeKind::Real:
            if (n.kind != NumSeq::Kind::Scalar)
                throw user_error(ErrCode::ShapeMismatch, "expected a scalar at R");
            return mk::num(n.value);
        case TypeKind::Unit: return mk::unit();
        case TypeKind::Top: return mk::top();
        case TypeKind::Bang: return mk::bang(numseq_render(n, t->a));
        case TypeKind::Tensor:
        case TypeKind::With: {
            if (n.kind != NumSeq::Kind::Pair)
                throw user_error(ErrCode::ShapeMismatch, "expected a pair at " + print_type(t));
            TermPtr a = numseq_render(n.kids[0], t->a);
            TermPtr b = numseq_render(n.kids[1], t->b);
            return t->kind == TypeKind::Tensor ? mk::pair(a, b) : mk::withpair(a, b);
        }
        case TypeKind::Arrow:
            throw user_error(ErrCode::ShapeMismatch, "cannot render a numeral sequence at an arrow type");
    }
    throw internal_error("numseq_render");
}

NumSeq numseq_read(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Num: return NumSeq::scalar(t->value);
        case TermKind::Unit:
        case TermKind::Top: return NumSeq::empty();
        case TermKind::Bang: return numseq_read(t->a);
        case TermKind::Pair:
        case TermKind::WithPair: {
            NumSeq a = numseq_read(t->a);
            return NumSeq::pair(std::move(a), numseq_read(t->b));
        }
        default:
            throw user_error(ErrCode::ShapeMismatch,
                             "not a numeral sequence value: " + print_term(t));
    }
}

}  // namespace llad
