#include <cctype>
#include <cstdlib>
#include <functional>

#include "llad/linear_a.hpp"

namespace llad::lina {

// ------------------------------------------------------------------ printing

std::string print_lin(const LinPtr& e) {
    switch (e->kind) {
        case LKind::VarPair: return "(" + e->x + "; " + e->y + ")";
        case LKind::LetPair:
            return "let (" + e->x + "; " + e->y + ") = " + print_lin(e->a) + " in " + print_lin(e->b);
        case LKind::TupP0: return "tupP()";
        case LKind::TupP2: return "tupP(" + e->x + ", " + e->y + ")";
        case LKind::LetTupP0: return "let tupP() = " + e->z + " in " + print_lin(e->a);
        case LKind::LetTupP2:
            return "let tupP(" + e->x + ", " + e->y + ") = " + e->z + " in " + print_lin(e->a);
        case LKind::TupT0: return "tupT()";
        case LKind::TupT2: return "tupT(" + e->x + ", " + e->y + ")";
        case LKind::LetTupT0: return "let tupT() = " + e->z + " in " + print_lin(e->a);
        case LKind::LetTupT2:
            return "let tupT(" + e->x + ", " + e->y + ") = " + e->z + " in " + print_lin(e->a);
        case LKind::Num: return fmt_double(e->value);
        case LKind::PrimApp: {
            std::string s = e->fn + "(";
            for (size_t i = 0; i < e->args.size(); i++) {
                if (i) s += ", ";
                s += e->args[i];
            }
            return s + ")";
        }
        case LKind::Zero: return "zero : " + print_jtype(e->ty);
        case LKind::Add: return e->x + " +. " + e->y;
        case LKind::Scale: return e->x + " *. " + e->y;
        case LKind::Dup: return "dup(" + e->y + ")";
        case LKind::Drop: return "drop(" + print_lin(e->a) + ")";
        case LKind::PrimVar: return e->x;
        case LKind::TanVar: return e->y;
        case LKind::LetPrim: return "let " + e->x + " = " + print_lin(e->a) + " in " + print_lin(e->b);
        case LKind::LetTan: return "let " + e->y + " = " + print_lin(e->a) + " in " + print_lin(e->b);
        case LKind::PairE: return "(" + print_lin(e->a) + "; " + print_lin(e->b) + ")";
        case LKind::TupPE: return "tupP(" + print_lin(e->a) + ", " + print_lin(e->b) + ")";
        case LKind::TupTE: return "tupT(" + print_lin(e->a) + ", " + print_lin(e->b) + ")";
    }
    return "";
}

// ------------------------------------------------------------------- parsing

namespace {

bool is_tan_name(const std::string& n) { return !n.empty() && n.back() == '\''; }

struct LinParser {
    std::string src;
    size_t pos = 0;
    int line = 1, col = 1;

    explicit LinParser(std::string s) : src(std::move(s)) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw user_error(ErrCode::Parse, "parse error at " + std::to_string(line) + ":" +
                                             std::to_string(col) + ": " + msg);
    }

    void bump(size_t n) {
        for (size_t i = 0; i < n && pos < src.size(); i++, pos++) {
            if (src[pos] == '\n') { line++; col = 1; } else col++;
        }
    }

    void skip_ws() {
        for (;;) {
            while (pos < src.size() && std::isspace((unsigned char)src[pos])) bump(1);
            if (pos + 1 < src.size() && src[pos] == '-' && src[pos + 1] == '-') {
                while (pos < src.size() && src[pos] != '\n') bump(1);
                continue;
            }
            break;
        }
    }

    bool eat(const std::string& tok) {
        skip_ws();
        if (src.compare(pos, tok.size(), tok) == 0) {
            // keywords must not be a prefix of a longer identifier
            if (std::isalpha((unsigned char)tok[0])) {
                size_t end = pos + tok.size();
                if (end < src.size() && (std::isalnum((unsigned char)src[end]) || src[end] == '_' ||
                                         src[end] == '\'' || src[end] == '#'))
                    return false;
            }
            bump(tok.size());
            return true;
        }
        return false;
    }

    void expect(const std::string& tok) {
        if (!eat(tok)) fail("expected '" + tok + "'");
    }

    bool peek_is(const std::string& tok) {
        size_t save_pos = pos;
        int sl = line, sc = col;
        bool ok = eat(tok);
        pos = save_pos;
        line = sl;
        col = sc;
        return ok;
    }

    std::string ident() {
        skip_ws();
        if (pos >= src.size() || !(std::isalpha((unsigned char)src[pos]) || src[pos] == '_'))
            fail("expected an identifier");
        size_t j = pos;
        while (j < src.size() && (std::isalnum((unsigned char)src[j]) || src[j] == '_' ||
                                  src[j] == '\'' || src[j] == '#'))
            j++;
        std::string n = src.substr(pos, j - pos);
        bump(j - pos);
        return n;
    }

    bool number_next() {
        skip_ws();
        if (pos >= src.size()) return false;
        char c = src[pos];
        if (std::isdigit((unsigned char)c)) return true;
        return c == '-' && pos + 1 < src.size() && std::isdigit((unsigned char)src[pos + 1]);
    }

    double number() {
        skip_ws();
        char* end = nullptr;
        double v = std::strtod(src.c_str() + pos, &end);
        size_t len = size_t(end - (src.c_str() + pos));
        if (len == 0) fail("expected a number");
        bump(len);
        return v;
    }

    JTPtr jtype() {
        JTPtr lhs = jtype_atom();
        skip_ws();
        if (eat("*")) return jt_tensor(lhs, jtype());
        return lhs;
    }

    JTPtr jtype_atom() {
        skip_ws();
        if (eat("(")) {
            JTPtr t = jtype();
            expect(")");
            return t;
        }
        if (eat("R")) return jt_real();
        if (eat("1")) return jt_one();
        fail("expected a type");
    }

    LinPtr expr() {
        skip_ws();
        if (eat("let")) return let_form();
        return atom();
    }

    LinPtr let_form() {
        skip_ws();
        if (eat("(")) {
            std::string x = ident();
            expect(";");
            std::string y = ident();
            if (!is_tan_name(y)) fail("tangent identifier '" + y + "' must end in '");
            expect(")");
            expect("=");
            LinPtr e1 = expr();
            expect("in");
            return le::let_pair(x, y, e1, expr());
        }
        if (eat("tupP")) {
            expect("(");
            if (eat(")")) {
                expect("=");
                std::string z = ident();
                expect("in");
                return le::let_tup_p0(z, expr());
            }
            std::string x1 = ident();
            expect(",");
            std::string x2 = ident();
            expect(")");
            expect("=");
            std::string z = ident();
            expect("in");
            return le::let_tup_p2(x1, x2, z, expr());
        }
        if (eat("tupT")) {
            expect("(");
            if (eat(")")) {
                expect("=");
                std::string z = ident();
                if (!is_tan_name(z)) fail("tangent tuple elimination needs a tangent identifier");
                expect("in");
                return le::let_tup_t0(z, expr());
            }
            std::string y1 = ident();
            expect(",");
            std::string y2 = ident();
            expect(")");
            expect("=");
            std::string z = ident();
            if (!is_tan_name(y1) || !is_tan_name(y2) || !is_tan_name(z))
                fail("tangent tuple elimination needs tangent identifiers");
            expect("in");
            return le::let_tup_t2(y1, y2, z, expr());
        }
        std::string n = ident();
        expect("=");
        LinPtr e1 = expr();
        expect("in");
        LinPtr e2 = expr();
        return is_tan_name(n) ? le::let_tan(n, e1, e2) : le::let_prim(n, e1, e2);
    }

    LinPtr atom() {
        skip_ws();
        if (number_next()) return le::num(number());
        if (eat("zero")) {
            expect(":");
            return le::zero(jtype());
        }
        if (eat("dup")) {
            expect("(");
            std::string y = ident();
            if (!is_tan_name(y)) fail("dup needs a tangent identifier");
            expect(")");
            return le::dup(y);
        }
        if (eat("drop")) {
            expect("(");
            LinPtr e = expr();
            expect(")");
            return le::drop(e);
        }
        if (eat("tupP")) {
            expect("(");
            if (eat(")")) return le::tup_p0();
            LinPtr a = expr();
            expect(",");
            LinPtr b = expr();
            expect(")");
            return le::tup_pe(a, b);
        }
        if (eat("tupT")) {
            expect("(");
            if (eat(")")) return le::tup_t0();
            LinPtr a = expr();
            expect(",");
            LinPtr b = expr();
            expect(")");
            return le::tup_te(a, b);
        }
        if (eat("(")) {
            LinPtr a = expr();
            if (eat(")")) return a;  // grouping
            expect(";");
            LinPtr b = expr();
            expect(")");
            return le::pair_e(a, b);
        }
        std::string n = ident();
        if (is_fun_symbol(n) && peek_is("(")) {
            expect("(");
            std::vector<std::string> args;
            args.push_back(ident());
            while (eat(",")) args.push_back(ident());
            expect(")");
            return le::prim(n, std::move(args));
        }
        if (eat("+.")) {
            std::string m = ident();
            if (!is_tan_name(n) || !is_tan_name(m)) fail("+. needs tangent operands");
            return le::add(n, m);
        }
        if (eat("*.")) {
            std::string m = ident();
            if (is_tan_name(n) || !is_tan_name(m)) fail("*. needs a primal and a tangent operand");
            return le::scale(n, m);
        }
        return is_tan_name(n) ? le::tan_var(n) : le::prim_var(n);
    }
};

}  // namespace

LinPtr parse_lin(const std::string& src) {
    LinParser p(src);
    LinPtr e = p.expr();
    p.skip_ws();
    if (p.pos != p.src.size()) p.fail("trailing input after expression");
    return e;
}

JTPtr parse_jtype(const std::string& src) {
    LinParser p(src);
    JTPtr t = p.jtype();
    p.skip_ws();
    if (p.pos != p.src.size()) p.fail("trailing input after type");
    return t;
}

// ------------------------------------------------------------------- sorts

bool is_primal_expr(const LinPtr& e) {
    switch (e->kind) {
        case LKind::PrimVar:
        case LKind::Num:
        case LKind::PrimApp:
        case LKind::TupP0:
        case LKind::TupP2: return true;
        case LKind::LetPrim: return is_primal_expr(e->a) && is_primal_expr(e->b);
        case LKind::Drop: return is_primal_expr(e->a);
        case LKind::TupPE: return is_primal_expr(e->a) && is_primal_expr(e->b);
        case LKind::LetTupP0:
        case LKind::LetTupP2: return is_primal_expr(e->a);
        default: return false;
    }
}

bool is_tangent_expr(const LinPtr& e) {
    switch (e->kind) {
        case LKind::TanVar:
        case LKind::Dup:
        case LKind::Zero:
        case LKind::Add:
        case LKind::Scale:
        case LKind::TupT0:
        case LKind::TupT2: return true;
        case LKind::LetTan: return is_tangent_expr(e->a) && is_tangent_expr(e->b);
        case LKind::Drop: return is_tangent_expr(e->a);
        case LKind::TupTE: return is_tangent_expr(e->a) && is_tangent_expr(e->b);
        case LKind::LetTupT0:
        case LKind::LetTupT2: return is_tangent_expr(e->a);
        default: return false;
    }
}

bool is_linear_b(const LinPtr& d) {
    switch (d->kind) {
        case LKind::VarPair: return true;
        case LKind::PairE: return is_primal_expr(d->a) && is_tangent_expr(d->b);
        case LKind::LetPrim: return is_primal_expr(d->a) && is_linear_b(d->b);
        case LKind::LetTupP0:
        case LKind::LetTupP2: return is_linear_b(d->a);
        default: return false;
    }
}

// ------------------------------------------------- desugaring, alpha renaming

namespace {

std::string fresh_tan(FreshSupply& s, const std::string& hint) {
    std::string base = hint;
    if (!base.empty() && base.back() == '\'') base.pop_back();
    return s.fresh(base.empty() ? "w" : base) + "'";
}

struct Renamer {
    FreshSupply& supply;
    std::unordered_map<std::string, std::string> map;

    std::string get(const std::string& n) const {
        auto it = map.find(n);
        return it == map.end() ? n : it->second;
    }

    std::string bind(const std::string& n) {
        std::string nn = is_tan_name(n) ? fresh_tan(supply, n)
                                        : supply.fresh(n.substr(0, n.find('#')));
        map[n] = nn;
        return nn;
    }
};

LinPtr rename_rec(const LinPtr& e, Renamer r) {
    switch (e->kind) {
        case LKind::VarPair: return le::var_pair(r.get(e->x), r.get(e->y));
        case LKind::LetPair: {
            LinPtr a = rename_rec(e->a, r);
            Renamer r2 = r;
            std::string x = r2.bind(e->x), y = r2.bind(e->y);
            return le::let_pair(x, y, a, rename_rec(e->b, r2));
        }
        case LKind::TupP0: return e;
        case LKind::TupP2: return le::tup_p2(r.get(e->x), r.get(e->y));
        case LKind::LetTupP0: return le::let_tup_p0(r.get(e->z), rename_rec(e->a, r));
        case LKind::LetTupP2: {
            std::string z = r.get(e->z);
            Renamer r2 = r;
            std::string x = r2.bind(e->x), y = r2.bind(e->y);
            return le::let_tup_p2(x, y, z, rename_rec(e->a, r2));
        }
        case LKind::TupT0: return e;
        case LKind::TupT2: return le::tup_t2(r.get(e->x), r.get(e->y));
        case LKind::LetTupT0: return le::let_tup_t0(r.get(e->z), rename_rec(e->a, r));
        case LKind::LetTupT2: {
            std::string z = r.get(e->z);
            Renamer r2 = r;
            std::string x = r2.bind(e->x), y = r2.bind(e->y);
            return le::let_tup_t2(x, y, z, rename_rec(e->a, r2));
        }
        case LKind::Num:
        case LKind::Zero: return e;
        case LKind::PrimApp: {
            std::vector<std::string> args;
            for (auto& a : e->args) args.push_back(r.get(a));
            return le::prim(e->fn, std::move(args));
        }
        case LKind::Add: return le::add(r.get(e->x), r.get(e->y));
        case LKind::Scale: return le::scale(r.get(e->x), r.get(e->y));
        case LKind::Dup: return le::dup(r.get(e->y));
        case LKind::Drop: return le::drop(rename_rec(e->a, r));
        case LKind::PrimVar: return le::prim_var(r.get(e->x));
        case LKind::TanVar: return le::tan_var(r.get(e->y));
        case LKind::LetPrim: {
            LinPtr a = rename_rec(e->a, r);
            Renamer r2 = r;
            std::string x = r2.bind(e->x);
            return le::let_prim(x, a, rename_rec(e->b, r2));
        }
        case LKind::LetTan: {
            LinPtr a = rename_rec(e->a, r);
            Renamer r2 = r;
            std::string y = r2.bind(e->y);
            return le::let_tan(y, a, rename_rec(e->b, r2));
        }
        case LKind::PairE: return le::pair_e(rename_rec(e->a, r), rename_rec(e->b, r));
        case LKind::TupPE: return le::tup_pe(rename_rec(e->a, r), rename_rec(e->b, r));
        case LKind::TupTE: return le::tup_te(rename_rec(e->a, r), rename_rec(e->b, r));
    }
    throw internal_error("rename_rec");
}

}  // namespace

LinPtr lin_alpha_unique(const LinPtr& e, FreshSupply& supply) {
    std::unordered_set<std::string> names;
    lin_all_names(e, names);
    for (auto& n : names) {
        supply.avoid(n);
        if (is_tan_name(n)) supply.avoid(n.substr(0, n.size() - 1));
    }
    return rename_rec(e, Renamer{supply, {}});
}

LinPtr desugar(const LinPtr& e, FreshSupply& s) {
    switch (e->kind) {
        case LKind::PrimVar: {
            // x  ~  let (w; y') = tupT() in let tupP() = w in (x; y')
            std::string w = s.fresh("w"), y = fresh_tan(s, "w");
            return le::let_pair(w, y, le::tup_t0(), le::let_tup_p0(w, le::var_pair(e->x, y)));
        }
        case LKind::TanVar: {
            std::string w = s.fresh("w"), y = fresh_tan(s, "w");
            return le::let_pair(w, y, le::tup_p0(), le::let_tup_t0(y, le::var_pair(w, e->y)));
        }
        case LKind::LetPrim: {
            std::string y = fresh_tan(s, "w");
            return le::let_pair(e->x, y, desugar(e->a, s), le::let_tup_t0(y, desugar(e->b, s)));
        }
        case LKind::LetTan: {
            std::string w = s.fresh("w");
            return le::let_pair(w, e->y, desugar(e->a, s), le::let_tup_p0(w, desugar(e->b, s)));
        }
        case LKind::PairE: {
            std::string x = s.fresh("w"), y = fresh_tan(s, "w"), u = s.fresh("w"),
                        v = fresh_tan(s, "w");
            // (e1; e2) ~ let x = e1 in let y' = e2 in (x; y')
            return le::let_pair(
                x, v, desugar(e->a, s),
                le::let_tup_t0(v, le::let_pair(u, y, desugar(e->b, s),
                                               le::let_tup_p0(u, le::var_pair(x, y)))));
        }
        case LKind::TupPE: {
            std::string x = s.fresh("w"), y = s.fresh("w"), tx = fresh_tan(s, "w"),
                        ty = fresh_tan(s, "w");
            return le::let_pair(
                x, tx, desugar(e->a, s),
                le::let_tup_t0(tx, le::let_pair(y, ty, desugar(e->b, s),
                                                le::let_tup_t0(ty, le::tup_p2(x, y)))));
        }
        case LKind::TupTE: {
            std::string x = s.fresh("w"), y = s.fresh("w"), tx = fresh_tan(s, "w"),
                        ty = fresh_tan(s, "w");
            return le::let_pair(
                x, tx, desugar(e->a, s),
                le::let_tup_p0(x, le::let_pair(y, ty, desugar(e->b, s),
                                               le::let_tup_p0(y, le::tup_t2(tx, ty)))));
        }
        case LKind::LetPair:
            return le::let_pair(e->x, e->y, desugar(e->a, s), desugar(e->b, s));
        case LKind::LetTupP0: return le::let_tup_p0(e->z, desugar(e->a, s));
        case LKind::LetTupP2: return le::let_tup_p2(e->x, e->y, e->z, desugar(e->a, s));
        case LKind::LetTupT0: return le::let_tup_t0(e->z, desugar(e->a, s));
        case LKind::LetTupT2: return le::let_tup_t2(e->x, e->y, e->z, desugar(e->a, s));
        case LKind::Drop: return le::drop(desugar(e->a, s));
        default: return e;
    }
}

// ------------------------------------------------------------ alpha equality

namespace {

bool alpha_rec(const LinPtr& a, const LinPtr& b, std::unordered_map<std::string, std::string> m) {
    auto eq = [&](const std::string& x, const std::string& y) {
        auto it = m.find(x);
        return it != m.end() ? it->second == y : x == y;
    };
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case LKind::VarPair:
        case LKind::TupP2:
        case LKind::TupT2:
        case LKind::Add:
        case LKind::Scale: return eq(a->x, b->x) && eq(a->y, b->y);
        case LKind::Dup: return eq(a->y, b->y);
        case LKind::Num: return a->value == b->value;
        case LKind::Zero: return jt_equal(a->ty, b->ty);
        case LKind::TupP0:
        case LKind::TupT0: return true;
        case LKind::PrimApp: {
            if (a->fn != b->fn || a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); i++)
                if (!eq(a->args[i], b->args[i])) return false;
            return true;
        }
        case LKind::PrimVar: return eq(a->x, b->x);
        case LKind::TanVar: return eq(a->y, b->y);
        case LKind::Drop: return alpha_rec(a->a, b->a, m);
        case LKind::LetPair: {
            if (!alpha_rec(a->a, b->a, m)) return false;
            m[a->x] = b->x;
            m[a->y] = b->y;
            return alpha_rec(a->b, b->b, m);
        }
        case LKind::LetTupP0:
        case LKind::LetTupT0: return eq(a->z, b->z) && alpha_rec(a->a, b->a, m);
        case LKind::LetTupP2:
        case LKind::LetTupT2: {
            if (!eq(a->z, b->z)) return false;
            m[a->x] = b->x;
            m[a->y] = b->y;
            return alpha_rec(a->a, b->a, m);
        }
        case LKind::LetPrim: {
            if (!alpha_rec(a->a, b->a, m)) return false;
            m[a->x] = b->x;
            return alpha_rec(a->b, b->b, m);
        }
        case LKind::LetTan: {
            if (!alpha_rec(a->a, b->a, m)) return false;
            m[a->y] = b->y;
            return alpha_rec(a->b, b->b, m);
        }
        case LKind::PairE:
        case LKind::TupPE:
        case LKind::TupTE: return alpha_rec(a->a, b->a, m) && alpha_rec(a->b, b->b, m);
    }
    return false;
}

}  // namespace

bool lin_alpha_equal(const LinPtr& a, const LinPtr& b) { return alpha_rec(a, b, {}); }

}  // namespace llad::lina
