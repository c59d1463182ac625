#pragma once

// Concrete syntax: expression parser, schema parser and pretty-printer.
//
//   e ::= ident | "[" number "]" | e "^T" | e "*" e | e ".*" e | e "+" e
//       | fname "(" e {"," e} ")" | "for" ident "," ident ["=" e] "." e
//       | ("sum" | "prod" | "hprod") ident "." e
//       | "ones" "(" e ")" | "diag" "(" e ")"
//       | ("Sless" | "Emin" | "Emax" | "Nshift") "[" ident "]" | "(" e ")"
//
// Binding strength from tightest: ^T, *, .*, +. Binders extend to the right
// as far as possible.

#include <cctype>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "matloop/ast.hpp"

namespace matloop {

namespace detail {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Dot, Eq, Plus, Star, DotStar, Transp, End };

inline std::string_view tok_name(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Eq: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Star: return "'*'";
    case Tok::DotStar: return "'.*'";
    case Tok::Transp: return "'^T'";
    case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

inline bool is_keyword(std::string_view s) {
    static constexpr std::string_view kws[] = {"for", "sum", "prod", "hprod", "ones", "diag",
                                               "Sless", "Emin", "Emax", "Nshift"};
    for (auto k : kws)
        if (k == s) return true;
    return false;
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

private:
    SourceSpan here() const { return {pos_, pos_, line_, col_}; }

    void advance(std::size_t n = 1) {
        for (std::size_t k = 0; k < n && pos_ < src_.size(); ++k) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            unsigned char c = static_cast<unsigned char>(src_[pos_]);
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    Token make(Tok k, std::size_t len, SourceSpan start) {
        Token t{k, std::string(src_.substr(pos_, len)), start};
        advance(len);
        t.span.end = pos_;
        return t;
    }

    static bool digit(char c) { return c >= '0' && c <= '9'; }

    Token next() {
        SourceSpan start = here();
        if (pos_ >= src_.size()) return Token{Tok::End, "", start};
        char c = src_[pos_];
        auto peek = [&](std::size_t k) { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t n = 0;
            while (pos_ + n < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_ + n])) || src_[pos_ + n] == '_'))
                ++n;
            return make(Tok::Ident, n, start);
        }
        if (digit(c) || (c == '-' && digit(peek(1)))) {
            std::size_t n = c == '-' ? 1 : 0;
            while (digit(peek(n))) ++n;
            if (peek(n) == '.' && digit(peek(n + 1))) {
                ++n;
                while (digit(peek(n))) ++n;
            }
            if (peek(n) == 'e' || peek(n) == 'E') {
                std::size_t m = n + 1;
                if (peek(m) == '+' || peek(m) == '-') ++m;
                if (digit(peek(m))) {
                    n = m;
                    while (digit(peek(n))) ++n;
                }
            }
            return make(Tok::Number, n, start);
        }
        switch (c) {
        case '(': return make(Tok::LParen, 1, start);
        case ')': return make(Tok::RParen, 1, start);
        case '[': return make(Tok::LBracket, 1, start);
        case ']': return make(Tok::RBracket, 1, start);
        case ',': return make(Tok::Comma, 1, start);
        case '=': return make(Tok::Eq, 1, start);
        case '+': return make(Tok::Plus, 1, start);
        case '*': return make(Tok::Star, 1, start);
        case '.': return peek(1) == '*' ? make(Tok::DotStar, 2, start) : make(Tok::Dot, 1, start);
        case '^':
            if (peek(1) == 'T') return make(Tok::Transp, 2, start);
            break;
        default: break;
        }
        start.end = start.start + 1;
        throw SyntaxError("unexpected character '" + printable(c) + "'", start);
    }

    static std::string printable(char c) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u >= 32 && u < 127) return std::string(1, c);
        static const char* hex = "0123456789abcdef";
        return std::string("\\x") + hex[u >> 4] + hex[u & 15];
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

    Expr parse_all() {
        Expr e = expr();
        if (cur().kind != Tok::End) fail("unexpected " + describe(cur()), {"'+'", "'*'", "'.*'", "'^T'", "end of input"});
        return e;
    }

private:
    static constexpr int max_depth = 2000;

    const Token& cur() const { return toks_[pos_]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_ident(std::string_view s) const { return at(Tok::Ident) && cur().text == s; }

    static std::string describe(const Token& t) {
        if (t.kind == Tok::End) return "end of input";
        return "'" + t.text + "'";
    }

    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        SourceSpan sp = cur().span;
        throw SyntaxError(msg, sp, std::move(expected));
    }

    Token expect(Tok k) {
        if (!at(k)) fail("unexpected " + describe(cur()), {std::string(tok_name(k))});
        return toks_[pos_++];
    }

    std::string expect_name() {
        if (!at(Tok::Ident) || is_keyword(cur().text))
            fail("unexpected " + describe(cur()), {"identifier"});
        return toks_[pos_++].text;
    }

    Expr finish(Node::Data data, const SourceSpan& start) const {
        SourceSpan sp = start;
        sp.end = pos_ > 0 ? toks_[pos_ - 1].span.end : start.end;
        return ex::make(std::move(data), sp);
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > max_depth) p.fail("expression nested too deeply", {});
        }
        ~DepthGuard() { --p.depth_; }
    };

    Expr expr() {
        DepthGuard guard(*this);
        SourceSpan start = cur().span;
        Expr lhs = scalar_product();
        while (at(Tok::Plus)) {
            ++pos_;
            Expr rhs = scalar_product();
            lhs = finish(AddNode{lhs, rhs}, start);
        }
        return lhs;
    }

    Expr scalar_product() {
        SourceSpan start = cur().span;
        Expr lhs = product();
        while (at(Tok::DotStar)) {
            ++pos_;
            Expr rhs = product();
            lhs = finish(ScalarMulNode{lhs, rhs}, start);
        }
        return lhs;
    }

    Expr product() {
        SourceSpan start = cur().span;
        Expr lhs = postfix();
        while (at(Tok::Star)) {
            ++pos_;
            Expr rhs = postfix();
            lhs = finish(MatMulNode{lhs, rhs}, start);
        }
        return lhs;
    }

    Expr postfix() {
        SourceSpan start = cur().span;
        Expr e = primary();
        while (at(Tok::Transp)) {
            ++pos_;
            e = finish(TransposeNode{e}, start);
        }
        return e;
    }

    Expr primary() {
        DepthGuard guard(*this);
        SourceSpan start = cur().span;
        if (at(Tok::LParen)) {
            ++pos_;
            Expr e = expr();
            expect(Tok::RParen);
            return e;
        }
        if (at(Tok::LBracket)) {
            ++pos_;
            std::string lit;
            if (at(Tok::Number) || at_ident("inf")) {
                lit = toks_[pos_++].text;
            } else {
                fail("unexpected " + describe(cur()), {"number", "'inf'"});
            }
            expect(Tok::RBracket);
            return finish(ConstNode{lit}, start);
        }
        if (!at(Tok::Ident))
            fail("unexpected " + describe(cur()), {"identifier", "'('", "'['", "'for'", "'sum'", "'prod'", "'hprod'"});
        const std::string word = cur().text;
        if (word == "for") {
            ++pos_;
            std::string v = expect_name();
            expect(Tok::Comma);
            std::string x = expect_name();
            std::optional<Expr> init;
            if (at(Tok::Eq)) {
                ++pos_;
                init = expr();
            }
            expect(Tok::Dot);
            Expr body = expr();
            return finish(ForNode{v, x, init, body}, start);
        }
        if (word == "sum" || word == "prod" || word == "hprod") {
            ++pos_;
            Quantifier q = word == "sum" ? Quantifier::Sum : word == "prod" ? Quantifier::Prod : Quantifier::Hadamard;
            std::string v = expect_name();
            expect(Tok::Dot);
            Expr body = expr();
            return finish(QuantNode{q, v, body}, start);
        }
        if (word == "ones" || word == "diag") {
            ++pos_;
            expect(Tok::LParen);
            Expr a = expr();
            expect(Tok::RParen);
            if (word == "ones") return finish(OnesNode{a}, start);
            return finish(DiagNode{a}, start);
        }
        if (word == "Sless" || word == "Emin" || word == "Emax" || word == "Nshift") {
            ++pos_;
            OrderKind k = word == "Sless" ? OrderKind::Sless
                          : word == "Emin" ? OrderKind::Emin
                          : word == "Emax" ? OrderKind::Emax
                                           : OrderKind::Nshift;
            expect(Tok::LBracket);
            std::string sym;
            if (at(Tok::Number) && cur().text == "1") {
                sym = "1";
                ++pos_;
            } else {
                sym = expect_name();
            }
            expect(Tok::RBracket);
            return finish(OrderNode{k, SizeSymbol(sym)}, start);
        }
        ++pos_;
        if (word == "inf") {
            --pos_;
            fail("'inf' must appear inside brackets", {"'['"});
        }
        if (at(Tok::LParen)) {
            ++pos_;
            std::vector<Expr> args;
            args.push_back(expr());
            while (at(Tok::Comma)) {
                ++pos_;
                args.push_back(expr());
            }
            expect(Tok::RParen);
            return finish(ApplyNode{word, std::move(args)}, start);
        }
        return finish(VarNode{word}, start);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace detail

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).parse_all(); }

/// Lines `var NAME : SYM x SYM`; blank lines and `#` comments are skipped.
inline Schema parse_schema(std::string_view text) {
    static const std::regex line_re(
        R"(^\s*var\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*([A-Za-z_][A-Za-z0-9_]*|1)\s+x\s+([A-Za-z_][A-Za-z0-9_]*|1)\s*$)");
    Schema s;
    std::size_t offset = 0, lineno = 0;
    while (offset <= text.size()) {
        std::size_t nl = text.find('\n', offset);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(offset, nl - offset));
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos) {
            std::smatch m;
            if (!std::regex_match(line, m, line_re))
                throw SyntaxError("malformed schema line", SourceSpan{offset, nl, lineno, 1},
                                  {"var NAME : SYM x SYM"});
            if (detail::is_keyword(m[1].str()))
                throw SyntaxError("'" + m[1].str() + "' is a keyword", SourceSpan{offset, nl, lineno, 1});
            s.add(m[1].str(), make_type(m[2].str(), m[3].str()));
        }
        offset = nl + 1;
    }
    return s;
}

inline std::string print_schema(const Schema& s) {
    std::string out;
    for (const auto& [name, t] : s.vars())
        out += "var " + name + " : " + t.rows.name() + " x " + t.cols.name() + "\n";
    return out;
}

namespace detail {

// binding strength used by the printer; binders are weakest
inline int precedence(const Expr& e) {
    return visit(e, overloaded{
        [](const ForNode&) { return 0; },
        [](const QuantNode&) { return 0; },
        [](const AddNode&) { return 1; },
        [](const ScalarMulNode&) { return 2; },
        [](const MatMulNode&) { return 3; },
        [](const TransposeNode&) { return 4; },
        [](const auto&) { return 5; },
    });
}

inline void pretty_into(const Expr& e, std::string& out);

inline void pretty_operand(const Expr& e, bool parens, std::string& out) {
    if (parens) out += '(';
    pretty_into(e, out);
    if (parens) out += ')';
}

inline void pretty_into(const Expr& e, std::string& out) {
    auto binary = [&](const Expr& l, const Expr& r, int p, const char* op) {
        pretty_operand(l, precedence(l) < p, out);
        out += op;
        pretty_operand(r, precedence(r) <= p, out);
    };
    visit(e, overloaded{
        [&](const VarNode& n) { out += n.name; },
        [&](const TransposeNode& n) {
            pretty_operand(n.arg, precedence(n.arg) < 4, out);
            out += "^T";
        },
        [&](const MatMulNode& n) { binary(n.lhs, n.rhs, 3, " * "); },
        [&](const AddNode& n) { binary(n.lhs, n.rhs, 1, " + "); },
        [&](const ScalarMulNode& n) { binary(n.scalar, n.arg, 2, " .* "); },
        [&](const ApplyNode& n) {
            out += n.fname;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ", ";
                pretty_into(n.args[i], out);
            }
            out += ')';
        },
        [&](const ForNode& n) {
            out += "for " + n.iter + ", " + n.acc;
            if (n.init) {
                out += " = ";
                pretty_operand(*n.init, precedence(*n.init) == 0, out);
            }
            out += " . ";
            pretty_into(n.body, out);
        },
        [&](const ConstNode& n) { out += "[" + n.literal + "]"; },
        [&](const QuantNode& n) {
            out += to_string(n.kind);
            out += " " + n.iter + " . ";
            pretty_into(n.body, out);
        },
        [&](const OnesNode& n) {
            out += "ones(";
            pretty_into(n.arg, out);
            out += ')';
        },
        [&](const DiagNode& n) {
            out += "diag(";
            pretty_into(n.arg, out);
            out += ')';
        },
        [&](const OrderNode& n) {
            out += to_string(n.kind);
            out += "[" + n.symbol.name() + "]";
        },
    });
}

}  // namespace detail

inline std::string pretty(const Expr& e) {
    std::string out;
    detail::pretty_into(e, out);
    return out;
}

}  // namespace matloop
