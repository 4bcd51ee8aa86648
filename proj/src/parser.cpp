#include "kbp/parser.hpp"

#include <cctype>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace kbp {

using ast::Expr;
using ast::ExprPtr;
using ast::Pos;

namespace {

enum class Tok {
    Ident, Int, String,
    LParen, RParen, LBrack, RBrack, LBrace, RBrace,
    Comma, Semi, Colon, Assign, EqEq, Equals, Arrow, Box, LAngle, RAngle, Bar,
    And, Or, Dot, DotDot, Caret,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int number = 0;
    Pos pos;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::String: return "string";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBrack: return "'['";
        case Tok::RBrack: return "']'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::Comma: return "','";
        case Tok::Semi: return "';'";
        case Tok::Colon: return "':'";
        case Tok::Assign: return "':='";
        case Tok::EqEq: return "'=='";
        case Tok::Equals: return "'='";
        case Tok::Arrow: return "'->'";
        case Tok::Box: return "'[]'";
        case Tok::LAngle: return "'<<'";
        case Tok::RAngle: return "'>>'";
        case Tok::Bar: return "'|'";
        case Tok::And: return "'/\\'";
        case Tok::Or: return "'\\/'";
        case Tok::Dot: return "'.'";
        case Tok::DotDot: return "'..'";
        case Tok::Caret: return "'^'";
        case Tok::End: return "end of input";
    }
    return "?";
}

// Words that may not be used as names.
const std::unordered_set<std::string> kKeywords = {
    "type", "init_cond", "agent", "transitions", "begin", "end", "protocol", "observable", "if", "fi",
    "otherwise", "skip", "neg", "Knows", "Exists", "Forall", "X", "true", "false", "Bool",
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto peek = [&](std::size_t k) -> char { return i + k < src.size() ? src[i + k] : '\0'; };

    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if ((c == '-' && peek(1) == '-') || (c == '/' && peek(1) == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Pos p{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            // history suffix: name@digits
            if (j + 1 < src.size() && src[j] == '@' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0, p});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            std::string digits(src.substr(i, j - i));
            if (digits.size() > 9) throw SyntaxError(p, "integer literal too large");
            out.push_back({Tok::Int, digits, std::stoi(digits), p});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::size_t j = i + 1;
            while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
            if (j >= src.size() || src[j] != '"') throw SyntaxError(p, "unterminated string");
            out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), 0, p});
            advance(j - i + 1);
            continue;
        }
        struct Punct {
            const char* text;
            Tok kind;
        };
        static const Punct puncts[] = {
            {":=", Tok::Assign}, {"==", Tok::EqEq}, {"->", Tok::Arrow}, {"[]", Tok::Box},  {"<<", Tok::LAngle},
            {">>", Tok::RAngle}, {"/\\", Tok::And}, {"\\/", Tok::Or},   {"..", Tok::DotDot}, {"(", Tok::LParen},
            {")", Tok::RParen},  {"[", Tok::LBrack}, {"]", Tok::RBrack}, {"{", Tok::LBrace}, {"}", Tok::RBrace},
            {",", Tok::Comma},   {";", Tok::Semi},  {":", Tok::Colon},  {"=", Tok::Equals}, {"|", Tok::Bar},
            {".", Tok::Dot},     {"^", Tok::Caret},
        };
        bool matched = false;
        for (const auto& pu : puncts) {
            std::string_view t(pu.text);
            if (src.substr(i, t.size()) == t) {
                out.push_back({pu.kind, std::string(t), 0, p});
                advance(t.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw SyntaxError(p, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", 0, {line, col}});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    ast::Model model() {
        ast::Model m;
        std::set<std::string> names;  // env vars, types, agents share one namespace
        auto claim = [&](const std::string& n, Pos p, const char* what) {
            if (!names.insert(n).second) throw SyntaxError(p, std::string("duplicate declaration of ") + what + " '" + n + "'");
        };
        std::set<std::string> protocols;
        bool have_init = false;
        bool have_tau = false;
        while (!at(Tok::End)) {
            const Token& t = cur();
            if (is_word("type")) {
                next();
                ast::TypeDecl d;
                d.pos = t.pos;
                d.name = name("type name");
                claim(d.name, d.pos, "type");
                expect(Tok::Equals);
                d.type = type_ref();
                m.types.push_back(std::move(d));
            } else if (is_word("init_cond")) {
                if (have_init) throw SyntaxError(t.pos, "duplicate declaration of init_cond");
                have_init = true;
                next();
                expect(Tok::Equals);
                m.init = expr();
            } else if (is_word("agent")) {
                next();
                ast::AgentDecl a;
                a.pos = t.pos;
                a.name = name("agent name");
                claim(a.name, a.pos, "agent");
                a.protocol = expect(Tok::String).text;
                expect(Tok::LParen);
                if (!at(Tok::RParen)) {
                    do {
                        a.args.push_back(lvalue());
                    } while (accept(Tok::Comma));
                }
                expect(Tok::RParen);
                m.agents.push_back(std::move(a));
            } else if (is_word("transitions")) {
                if (have_tau) throw SyntaxError(t.pos, "duplicate declaration of transitions");
                have_tau = true;
                next();
                m.transitions = block();
            } else if (is_word("protocol")) {
                auto p = protocol();
                if (!protocols.insert(p.name).second) {
                    throw SyntaxError(p.pos, "duplicate declaration of protocol \"" + p.name + "\"");
                }
                m.protocols.push_back(std::move(p));
            } else if (t.kind == Tok::Ident && peek().kind == Tok::Colon) {
                auto d = var_decl(false);
                claim(d.name, d.pos, "variable");
                m.env_vars.push_back(std::move(d));
            } else {
                fail("expected a declaration");
            }
        }
        return m;
    }

    ExprPtr formula_only() {
        ExprPtr e = expr();
        if (!at(Tok::End)) fail("unexpected text after formula");
        return e;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& peek() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool is_word(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool accept(Tok k) {
        if (!at(k)) return false;
        next();
        return true;
    }
    bool accept_word(const char* w) {
        if (!is_word(w)) return false;
        next();
        return true;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        std::string found = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
        throw SyntaxError(cur().pos, msg + ", found " + found);
    }
    const Token& expect(Tok k) {
        if (!at(k)) fail(std::string("expected ") + tok_name(k));
        return next();
    }
    void expect_word(const char* w) {
        if (!is_word(w)) fail(std::string("expected '") + w + "'");
        next();
    }
    std::string name(const char* what) {
        if (!at(Tok::Ident) || kKeywords.count(cur().text)) fail(std::string("expected ") + what);
        return next().text;
    }

    ast::TypeRef type_ref() {
        if (accept_word("Bool")) return ast::TypeRef::boolean();
        if (accept(Tok::LBrace)) {
            ast::TypeRef t;
            t.kind = ast::TypeRef::Kind::Enum;
            std::set<std::string> seen;
            do {
                Pos p = cur().pos;
                std::string label = name("enumeration label");
                if (!seen.insert(label).second) throw SyntaxError(p, "duplicate enumeration label '" + label + "'");
                t.labels.push_back(label);
            } while (accept(Tok::Comma));
            expect(Tok::RBrace);
            return t;
        }
        if (at(Tok::Int)) {
            Pos p = cur().pos;
            int lo = next().number;
            expect(Tok::DotDot);
            int hi = expect(Tok::Int).number;
            if (hi < lo) throw SyntaxError(p, "empty range type");
            return ast::TypeRef::range(lo, hi);
        }
        return ast::TypeRef::named(name("type"));
    }

    ast::VarDecl var_decl(bool allow_observable) {
        ast::VarDecl d;
        d.pos = cur().pos;
        d.name = name("variable name");
        expect(Tok::Colon);
        if (is_word("observable")) {
            if (!allow_observable) fail("'observable' is only allowed in protocol declarations");
            next();
            d.observable = true;
        }
        d.type = type_ref();
        if (accept(Tok::LBrack)) {
            Pos p = cur().pos;
            std::string idx = name("index type");
            if (idx != "Agent") throw SyntaxError(p, "arrays may only be indexed by Agent");
            expect(Tok::RBrack);
            d.per_agent = true;
        }
        return d;
    }

    ast::ProtocolDecl protocol() {
        ast::ProtocolDecl p;
        p.pos = cur().pos;
        expect_word("protocol");
        p.name = expect(Tok::String).text;
        std::set<std::string> seen;
        auto claim = [&](const ast::VarDecl& d) {
            if (!seen.insert(d.name).second) {
                throw SyntaxError(d.pos, "duplicate declaration of '" + d.name + "' in protocol \"" + p.name + "\"");
            }
        };
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            do {
                p.params.push_back(var_decl(true));
                claim(p.params.back());
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        while (at(Tok::Ident) && peek().kind == Tok::Colon) {
            p.locals.push_back(var_decl(true));
            claim(p.locals.back());
        }
        if (accept_word("init_cond")) {
            expect(Tok::Equals);
            p.init = expr();
        }
        p.body = block();
        return p;
    }

    ast::Program block() {
        expect_word("begin");
        ast::Program prog;
        if (accept_word("end")) return prog;
        prog.push_back(statement());
        while (accept(Tok::Semi)) {
            if (is_word("end")) break;
            prog.push_back(statement());
        }
        expect_word("end");
        return prog;
    }

    ast::Statement statement() {
        ast::Statement s;
        s.pos = cur().pos;
        if (accept_word("if")) {
            s.branch = true;
            do {
                ast::Arm arm;
                arm.pos = cur().pos;
                if (accept_word("otherwise")) {
                    arm.guard = nullptr;
                } else {
                    if (!s.arms.empty() && s.arms.back().is_otherwise()) {
                        fail("'otherwise' must be the last arm");
                    }
                    arm.guard = expr();
                }
                expect(Tok::Arrow);
                arm.body = atomic();
                s.arms.push_back(std::move(arm));
            } while (accept(Tok::Box));
            expect_word("fi");
            return s;
        }
        s.atomic = atomic();
        return s;
    }

    ast::Atomic atomic() {
        ast::Atomic a;
        a.pos = cur().pos;
        if (accept_word("skip")) return a;
        if (accept(Tok::LAngle)) {
            if (at(Tok::Ident) && !kKeywords.count(cur().text)) a.action = next().text;
            if (accept(Tok::Bar)) {
                do {
                    a.assigns.push_back(assignment());
                } while (accept(Tok::Comma));
            }
            expect(Tok::RAngle);
        } else {
            a.assigns.push_back(assignment());
        }
        return a;
    }

    ast::Assign assignment() {
        ast::Assign as;
        as.pos = cur().pos;
        as.target = lvalue();
        expect(Tok::Assign);
        as.value = expr();
        return as;
    }

    ast::LValue lvalue() {
        ast::LValue lv;
        lv.pos = cur().pos;
        lv.name = name("variable");
        if (accept(Tok::LBrack)) {
            lv.index = name("index");
            expect(Tok::RBrack);
        }
        return lv;
    }

    // expr := and ('\/' and)*
    ExprPtr expr() {
        ExprPtr e = conjunction();
        while (at(Tok::Or)) {
            Pos p = next().pos;
            e = Expr::disj(e, conjunction(), p);
        }
        return e;
    }

    ExprPtr conjunction() {
        ExprPtr e = unary();
        while (at(Tok::And)) {
            Pos p = next().pos;
            e = Expr::conj(e, unary(), p);
        }
        return e;
    }

    ExprPtr unary() {
        Pos p = cur().pos;
        if (accept_word("neg")) return Expr::negate(unary(), p);
        if (accept_word("Knows")) {
            std::string who = name("agent");
            return Expr::knows(who, unary(), p);
        }
        if (accept_word("X")) {
            int steps = 1;
            if (accept(Tok::Caret)) steps = expect(Tok::Int).number;
            return Expr::next(steps, unary(), p);
        }
        if (is_word("Exists") || is_word("Forall")) {
            bool forall = next().text == "Forall";
            std::string var = name("bound variable");
            expect(Tok::Colon);
            std::string type = name("quantifier type");
            if (at(Tok::LParen) && peek().kind == Tok::RParen) {
                next();
                next();
            }
            return Expr::quant(forall, var, type, unary(), p);
        }
        return comparison();
    }

    ExprPtr comparison() {
        ExprPtr e = primary();
        if (at(Tok::EqEq)) {
            Pos p = next().pos;
            e = Expr::equals(e, primary(), p);
            if (at(Tok::EqEq)) fail("chained '==' needs parentheses");
        }
        return e;
    }

    ExprPtr primary() {
        Pos p = cur().pos;
        if (accept(Tok::LParen)) {
            ExprPtr e = expr();
            expect(Tok::RParen);
            return e;
        }
        if (accept_word("true")) return Expr::boolean(true, p);
        if (accept_word("false")) return Expr::boolean(false, p);
        if (at(Tok::Int)) return Expr::integer(next().number, p);
        std::string n = name("expression");
        if (accept(Tok::LBrack)) {
            std::string idx = name("index");
            expect(Tok::RBrack);
            return Expr::index(n, idx, p);
        }
        if (accept(Tok::Dot)) {
            std::string action = name("action name");
            return Expr::member(n, action, p);
        }
        return Expr::ident(n, p);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

ast::Model parse_model(std::string_view text) { return Parser(text).model(); }

ast::ExprPtr parse_formula(std::string_view text) { return Parser(text).formula_only(); }

}  // namespace kbp
