#include "llad/syntax.hpp"

#include <cctype>
#include <cstdlib>
#include <vector>

namespace llad {

// ------------------------------------------------------------------ printing

namespace {

// Type precedence: -o (0, right) < & (1, right) < * (2, right) < ! (3)
void print_type_rec(const TypePtr& t, int prec, std::string& out) {
    switch (t->kind) {
        case TypeKind::Real: out += "R"; return;
        case TypeKind::Unit: out += "1"; return;
        case TypeKind::Top: out += "Top"; return;
        case TypeKind::Bang:
            out += "!";
            print_type_rec(t->a, 3, out);
            return;
        case TypeKind::Arrow: {
            if (prec > 0) out += "(";
            print_type_rec(t->a, 1, out);
            out += " -o ";
            print_type_rec(t->b, 0, out);
            if (prec > 0) out += ")";
            return;
        }
        case TypeKind::With: {
            if (prec > 1) out += "(";
            print_type_rec(t->a, 2, out);
            out += " & ";
            print_type_rec(t->b, 1, out);
            if (prec > 1) out += ")";
            return;
        }
        case TypeKind::Tensor: {
            if (prec > 2) out += "(";
            print_type_rec(t->a, 3, out);
            out += " * ";
            print_type_rec(t->b, 2, out);
            if (prec > 2) out += ")";
            return;
        }
    }
}

void print_pattern_rec(const PatternPtr& p, std::string& out) {
    switch (p->kind) {
        case PatKind::Var:
            out += p->name + " : " + print_type(p->type);
            return;
        case PatKind::BangVar:
            out += "!" + p->name + " : " + print_type(p->type);
            return;
        case PatKind::Unit: out += "()"; return;
        case PatKind::Tensor:
            out += "(";
            print_pattern_rec(p->a, out);
            out += ", ";
            print_pattern_rec(p->b, out);
            out += ")";
            return;
        case PatKind::With:
            out += "<";
            print_pattern_rec(p->a, out);
            out += ", ";
            print_pattern_rec(p->b, out);
            out += ">";
            return;
    }
}

bool is_atom(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Lam: return false;
        case TermKind::App: return t->a->kind != TermKind::Lam;  // lets are not atoms
        default: return true;
    }
}

void print_term_rec(const TermPtr& t, std::string& out) {
    switch (t->kind) {
        case TermKind::Var: out += t->name; return;
        case TermKind::Fun: out += t->name; return;
        case TermKind::Num: out += fmt_double(t->value); return;
        case TermKind::Unit: out += "()"; return;
        case TermKind::Top: out += "<>"; return;
        case TermKind::DotPlus: out += "dot+"; return;
        case TermKind::DotTimes: out += "dot*"; return;
        case TermKind::Bang:
            out += "!";
            if (is_atom(t->a)) {
                print_term_rec(t->a, out);
            } else {
                out += "(";
                print_term_rec(t->a, out);
                out += ")";
            }
            return;
        case TermKind::Pair:
            out += "(";
            print_term_rec(t->a, out);
            out += ", ";
            print_term_rec(t->b, out);
            out += ")";
            return;
        case TermKind::WithPair:
            out += "<";
            print_term_rec(t->a, out);
            out += ", ";
            print_term_rec(t->b, out);
            out += ">";
            return;
        case TermKind::Lam:
            out += "lam ";
            print_pattern_rec(t->pat, out);
            out += " . ";
            print_term_rec(t->a, out);
            return;
        case TermKind::App:
            if (t->a->kind == TermKind::Lam) {
                out += "let ";
                print_pattern_rec(t->a->pat, out);
                out += " = ";
                print_term_rec(t->b, out);
                out += " in ";
                print_term_rec(t->a->a, out);
            } else {
                out += "(";
                print_term_rec(t->a, out);
                out += " ";
                print_term_rec(t->b, out);
                out += ")";
            }
            return;
    }
}

}  // namespace

std::string print_type(const TypePtr& t) {
    std::string out;
    print_type_rec(t, 0, out);
    return out;
}

std::string print_pattern(const PatternPtr& p) {
    std::string out;
    print_pattern_rec(p, out);
    return out;
}

std::string print_term(const TermPtr& t) {
    std::string out;
    print_term_rec(t, out);
    return out;
}

// ------------------------------------------------------------------- lexing

namespace {

enum class Tok {
    Ident, Number, Lam, Let, In, DotPlus, DotTimes,
    LParen, RParen, LAngle, RAngle, Comma, Dot, Bang, Colon, Equal,
    Arrow, Star, Amp, End,
};

struct Token {
    Tok kind;
    std::string text;
    double value = 0;
    int line = 1, col = 1;
};

struct Lexer {
    std::string src;
    size_t pos = 0;
    int line = 1, col = 1;
    std::vector<Token> toks;

    explicit Lexer(std::string s) : src(std::move(s)) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw user_error(ErrCode::Parse, "parse error at " + std::to_string(line) + ":" +
                                             std::to_string(col) + ": " + msg);
    }

    void advance(size_t n) {
        for (size_t i = 0; i < n && pos < src.size(); i++, pos++) {
            if (src[pos] == '\n') { line++; col = 1; } else col++;
        }
    }

    static bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
    static bool ident_char(char c) {
        return std::isalnum((unsigned char)c) || c == '_' || c == '\'' || c == '#';
    }

    void run() {
        while (pos < src.size()) {
            char c = src[pos];
            if (std::isspace((unsigned char)c)) { advance(1); continue; }
            if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
                while (pos < src.size() && src[pos] != '\n') advance(1);
                continue;
            }
            Token t;
            t.line = line;
            t.col = col;
            if (src.compare(pos, 4, "dot+") == 0) { t.kind = Tok::DotPlus; advance(4); }
            else if (src.compare(pos, 4, "dot*") == 0) { t.kind = Tok::DotTimes; advance(4); }
            else if (ident_start(c)) {
                size_t j = pos;
                while (j < src.size() && ident_char(src[j])) j++;
                t.text = src.substr(pos, j - pos);
                advance(j - pos);
                t.kind = t.text == "lam" ? Tok::Lam : t.text == "let" ? Tok::Let
                       : t.text == "in" ? Tok::In : Tok::Ident;
            } else if (std::isdigit((unsigned char)c) ||
                       (c == '-' && pos + 1 < src.size() && (std::isdigit((unsigned char)src[pos + 1]) || src[pos + 1] == '.'))) {
                char* end = nullptr;
                t.value = std::strtod(src.c_str() + pos, &end);
                size_t len = size_t(end - (src.c_str() + pos));
                if (len == 0) fail("bad number");
                t.text = src.substr(pos, len);
                t.kind = Tok::Number;
                advance(len);
            } else if (c == '-' && pos + 1 < src.size() && src[pos + 1] == 'o') {
                t.kind = Tok::Arrow;
                advance(2);
            } else {
                switch (c) {
                    case '(': t.kind = Tok::LParen; break;
                    case ')': t.kind = Tok::RParen; break;
                    case '<': t.kind = Tok::LAngle; break;
                    case '>': t.kind = Tok::RAngle; break;
                    case ',': t.kind = Tok::Comma; break;
                    case '.': t.kind = Tok::Dot; break;
                    case '!': t.kind = Tok::Bang; break;
                    case ':': t.kind = Tok::Colon; break;
                    case '=': t.kind = Tok::Equal; break;
                    case '*': t.kind = Tok::Star; break;
                    case '&': t.kind = Tok::Amp; break;
                    default: fail(std::string("unexpected character '") + c + "'");
                }
                advance(1);
            }
            toks.push_back(std::move(t));
        }
        toks.push_back(Token{Tok::End, "", 0, line, col});
    }
};

struct Parser {
    std::vector<Token> toks;
    size_t i = 0;

    const Token& peek() const { return toks[i]; }
    Token next() { return toks[i++]; }

    [[noreturn]] void fail(const std::string& msg) {
        const Token& t = peek();
        throw user_error(ErrCode::Parse, "parse error at " + std::to_string(t.line) + ":" +
                                             std::to_string(t.col) + ": " + msg);
    }

    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        i++;
    }

    // ---- types

    TypePtr type() { return type_arrow(); }

    TypePtr type_arrow() {
        TypePtr lhs = type_with();
        if (peek().kind == Tok::Arrow) {
            i++;
            return ty::arrow(lhs, type_arrow());
        }
        return lhs;
    }

    TypePtr type_with() {
        TypePtr lhs = type_tensor();
        if (peek().kind == Tok::Amp) {
            i++;
            return ty::with(lhs, type_with());
        }
        return lhs;
    }

    TypePtr type_tensor() {
        TypePtr lhs = type_atom();
        if (peek().kind == Tok::Star) {
            i++;
            return ty::tensor(lhs, type_tensor());
        }
        return lhs;
    }

    TypePtr type_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Bang: i++; return ty::bang(type_atom());
            case Tok::Number:
                if (t.text == "1") { i++; return ty::unit(); }
                fail("bad type");
            case Tok::Ident:
                if (t.text == "R") { i++; return ty::real(); }
                if (t.text == "Top") { i++; return ty::top(); }
                fail("unknown type name '" + t.text + "'");
            case Tok::LParen: {
                i++;
                TypePtr inner = type();
                expect(Tok::RParen, ")");
                return inner;
            }
            default: fail("expected a type");
        }
    }

    // ---- patterns

    PatternPtr pattern() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Bang: {
                i++;
                if (peek().kind != Tok::Ident) fail("expected variable after '!'");
                std::string name = next().text;
                expect(Tok::Colon, "':'");
                TypePtr ann = type();
                if (ann->kind != TypeKind::Bang)
                    fail("pattern !" + name + " must be annotated with a !-type");
                return pat::bangvar(name, ann);
            }
            case Tok::Ident: {
                std::string name = next().text;
                expect(Tok::Colon, "':'");
                return pat::var(name, type());
            }
            case Tok::LParen: {
                i++;
                if (peek().kind == Tok::RParen) { i++; return pat::unit(); }
                PatternPtr a = pattern();
                expect(Tok::Comma, "','");
                PatternPtr b = pattern();
                expect(Tok::RParen, ")");
                return pat::tensor(a, b);
            }
            case Tok::LAngle: {
                i++;
                PatternPtr a = pattern();
                expect(Tok::Comma, "','");
                PatternPtr b = pattern();
                expect(Tok::RAngle, ">");
                return pat::with(a, b);
            }
            default: fail("expected a pattern");
        }
    }

    // ---- terms

    TermPtr term() {
        switch (peek().kind) {
            case Tok::Lam: {
                i++;
                PatternPtr p = pattern();
                expect(Tok::Dot, "'.'");
                return mk::lam(p, term());
            }
            case Tok::Let: {
                i++;
                PatternPtr p = pattern();
                expect(Tok::Equal, "'='");
                TermPtr n = term();
                expect(Tok::In, "'in'");
                return mk::let_(p, n, term());
            }
            default: return atom();
        }
    }

    TermPtr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: i++; return mk::num(t.value);
            case Tok::DotPlus: i++; return mk::dotplus();
            case Tok::DotTimes: i++; return mk::dottimes();
            case Tok::Bang: i++; return mk::bang(atom());
            case Tok::Ident: {
                std::string name = next().text;
                return is_fun_symbol(name) ? mk::fun(name) : mk::var(name);
            }
            case Tok::LAngle: {
                i++;
                if (peek().kind == Tok::RAngle) { i++; return mk::top(); }
                TermPtr a = term();
                expect(Tok::Comma, "','");
                TermPtr b = term();
                expect(Tok::RAngle, ">");
                return mk::withpair(a, b);
            }
            case Tok::LParen: {
                i++;
                if (peek().kind == Tok::RParen) { i++; return mk::unit(); }
                TermPtr a = term();
                if (peek().kind == Tok::Comma) {
                    i++;
                    TermPtr b = term();
                    expect(Tok::RParen, ")");
                    return mk::pair(a, b);
                }
                if (peek().kind == Tok::RParen) { i++; return a; }
                TermPtr b = term();
                expect(Tok::RParen, ")");
                return mk::app(a, b);
            }
            default: fail("expected a term");
        }
    }
};

Parser make_parser(const std::string& src) {
    Lexer lx(src);
    lx.run();
    Parser p;
    p.toks = std::move(lx.toks);
    return p;
}

}  // namespace

TypePtr parse_type(const std::string& src) {
    Parser p = make_parser(src);
    TypePtr t = p.type();
    if (p.peek().kind != Tok::End) p.fail("trailing input after type");
    return t;
}

TermPtr parse_term(const std::string& src) {
    Parser p = make_parser(src);
    TermPtr t = p.term();
    if (p.peek().kind != Tok::End) p.fail("trailing input after term");
    return t;
}

}  // namespace llad
