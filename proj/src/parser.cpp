#include "swapmc/parser.hpp"
#include "swapmc/validate.hpp"

#include <charconv>
#include <cstring>
#include <limits>
#include <set>
#include <sstream>

namespace swapmc {

std::string ParseError::to_string() const {
    std::ostringstream os;
    os << span.line << ":" << span.column << ": error: " << message;
    if (!expected.empty()) {
        os << " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
        os << ")";
    }
    return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
    End,
    Ident,
    Int,
    String,
    Assign,   // :=
    Colon,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    DotDot,
    Dot,
    Arrow,    // ->
    Box,      // []
    LNondet,  // [[
    RNondet,  // ]]
    Bar,
    LAct,     // <<
    RAct,     // >>
    And,      // /\ (backslash)
    Or,       // \/
    Implies,  // =>
    Eq,
    Neq,      // /=
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Equals,
    Prime,
};

const char* tok_name(Tok t) {
    switch (t) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::Assign: return "':='";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::DotDot: return "'..'";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::Box: return "'[]'";
    case Tok::LNondet: return "'[['";
    case Tok::RNondet: return "']]'";
    case Tok::Bar: return "'|'";
    case Tok::LAct: return "'<<'";
    case Tok::RAct: return "'>>'";
    case Tok::And: return "'/\\'";
    case Tok::Or: return "'\\/'";
    case Tok::Implies: return "'=>'";
    case Tok::Eq: return "'=='";
    case Tok::Neq: return "'/='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Equals: return "'='";
    case Tok::Prime: return "'''";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceSpan span;
};

class Lexer {
public:
    Lexer(std::string_view src, std::vector<ParseError>& errors) : src_(src), errors_(errors) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t;
            t.span = {line_, col_, 0};
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const std::size_t start = pos_;
            if (lex_one(t)) {
                t.span.length = static_cast<int>(pos_ - start);
                out.push_back(std::move(t));
            }
        }
    }

private:
    char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                advance();
            } else if (c == '-' && peek(1) == '-') {
                while (pos_ < src_.size() && peek() != '\n') advance();
            } else if (c == '{' && peek(1) == '-') {
                const SourceSpan at{line_, col_, 2};
                int depth = 0;
                do {
                    if (peek() == '{' && peek(1) == '-') {
                        ++depth;
                        advance(2);
                    } else if (peek() == '-' && peek(1) == '}') {
                        --depth;
                        advance(2);
                    } else {
                        advance();
                    }
                } while (depth > 0 && pos_ < src_.size());
                if (depth > 0) errors_.push_back({at, "unterminated block comment", {"'-}'"}});
            } else {
                return;
            }
        }
    }

    static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

    bool lex_one(Token& t) {
        const char c = peek();
        if (ident_start(c)) {
            const std::size_t s = pos_;
            while (ident_char(peek())) advance();
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(s, pos_ - s));
            return true;
        }
        if (c >= '0' && c <= '9') {
            const std::size_t s = pos_;
            while (peek() >= '0' && peek() <= '9') advance();
            t.kind = Tok::Int;
            t.text = std::string(src_.substr(s, pos_ - s));
            return true;
        }
        if (c == '"') {
            const SourceSpan at{line_, col_, 1};
            advance();
            std::string s;
            while (pos_ < src_.size() && peek() != '"') {
                if (peek() == '\\' && (peek(1) == '"' || peek(1) == '\\')) {
                    s.push_back(peek(1));
                    advance(2);
                } else {
                    s.push_back(peek());
                    advance();
                }
            }
            if (pos_ >= src_.size()) {
                errors_.push_back({at, "unterminated string literal", {"'\"'"}});
                return false;
            }
            advance();
            t.kind = Tok::String;
            t.text = std::move(s);
            return true;
        }
        struct Sym {
            const char* text;
            Tok kind;
        };
        // Longest spellings first.
        static const Sym syms[] = {
            {":=", Tok::Assign}, {"..", Tok::DotDot}, {"->", Tok::Arrow},  {"[[", Tok::LNondet}, {"]]", Tok::RNondet},
            {"[]", Tok::Box},    {"<<", Tok::LAct},   {">>", Tok::RAct},   {"/\\", Tok::And},    {"\\/", Tok::Or},
            {"=>", Tok::Implies}, {"==", Tok::Eq},    {"/=", Tok::Neq},    {"<=", Tok::Le},      {">=", Tok::Ge},
            {":", Tok::Colon},   {",", Tok::Comma},   {";", Tok::Semi},    {"(", Tok::LParen},   {")", Tok::RParen},
            {"{", Tok::LBrace},  {"}", Tok::RBrace},  {".", Tok::Dot},     {"|", Tok::Bar},      {"<", Tok::Lt},
            {">", Tok::Gt},      {"+", Tok::Plus},    {"-", Tok::Minus},   {"=", Tok::Equals},   {"'", Tok::Prime},
        };
        for (const auto& s : syms) {
            const std::size_t n = std::strlen(s.text);
            if (src_.substr(pos_, n) == s.text) {
                t.kind = s.kind;
                t.text = s.text;
                advance(n);
                return true;
            }
        }
        std::string shown;
        const auto uc = static_cast<unsigned char>(c);
        if (uc >= 0x20 && uc < 0x7f) {
            shown = std::string("'") + c + "'";
        } else {
            char buf[8];
            std::snprintf(buf, sizeof buf, "0x%02X", uc);
            shown = buf;
        }
        errors_.push_back({{line_, col_, 1}, "unexpected character " + shown, {}});
        advance();
        return false;
    }

    std::string_view src_;
    std::vector<ParseError>& errors_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

struct SyntaxError {};

constexpr int kMaxDepth = 200;

bool is_item_keyword(const std::string& s) {
    static const std::set<std::string> kw = {"type", "define", "init_cond", "agent",
                                             "transitions", "fairness", "spec_obs", "protocol"};
    return kw.count(s) > 0;
}

// An expression under construction: either still a state expression or, once
// a temporal operator is involved, an LTL formula.
struct Term {
    std::optional<Formula> formula;
    Expr expr;
    SourceSpan span;

    bool temporal() const { return formula.has_value(); }
};

Formula expr_to_formula(const Expr& e) {
    switch (e.op) {
    case ExprOp::BoolLit: return Formula::truth(e.value != 0);
    case ExprOp::Not: return Formula::unary(LtlOp::Not, expr_to_formula(e.args[0]));
    case ExprOp::And: return Formula::binary(LtlOp::And, expr_to_formula(e.args[0]), expr_to_formula(e.args[1]));
    case ExprOp::Or: return Formula::binary(LtlOp::Or, expr_to_formula(e.args[0]), expr_to_formula(e.args[1]));
    case ExprOp::Implies:
        return Formula::binary(LtlOp::Implies, expr_to_formula(e.args[0]), expr_to_formula(e.args[1]));
    default: return Formula::atom(e);
    }
}

Formula to_formula(const Term& t) { return t.formula ? *t.formula : expr_to_formula(t.expr); }

class Parser {
public:
    Parser(std::vector<Token> toks, std::vector<ParseError>& errors) : toks_(std::move(toks)), errors_(errors) {}

    ModelIR parse_model() {
        ModelIR m;
        if (at(Tok::End)) {
            errors_.push_back({cur().span, "expected declaration", item_starts()});
            return m;
        }
        while (!at(Tok::End)) {
            const std::size_t before = pos_;
            try {
                parse_item(m);
            } catch (const SyntaxError&) {
                synchronise(before);
            }
        }
        return m;
    }

    Formula parse_spec_formula() {
        const Token& a = cur();
        if (!(a.kind == Tok::Ident && a.text == "A")) fail("expected path quantifier 'A'", {"'A'"});
        next();
        expect(Tok::LParen);
        Term body = implies(true);
        expect(Tok::RParen);
        return to_formula(body);
    }

    Expr parse_state_expr() { return state_expr(); }

    bool at_end() const { return at(Tok::End); }
    void expect_end() {
        if (!at(Tok::End)) fail("unexpected trailing input", {"end of input"});
    }

private:
    // --- token helpers -----------------------------------------------------

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_word(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }
    void next() {
        if (pos_ + 1 < toks_.size()) ++pos_;
    }

    [[noreturn]] void fail(std::string msg, std::vector<std::string> expected = {}) {
        errors_.push_back({cur().span, std::move(msg), std::move(expected)});
        throw SyntaxError{};
    }

    Token expect(Tok k) {
        if (!at(k)) {
            std::string found = at(Tok::End) ? "end of input" : "'" + cur().text + "'";
            fail(std::string("expected ") + tok_name(k) + ", found " + found, {tok_name(k)});
        }
        Token t = cur();
        next();
        return t;
    }

    void expect_word(const char* w) {
        if (!at_word(w)) {
            std::string found = at(Tok::End) ? "end of input" : "'" + cur().text + "'";
            fail(std::string("expected '") + w + "', found " + found, {std::string("'") + w + "'"});
        }
        next();
    }

    std::string expect_ident() {
        if (!at(Tok::Ident)) {
            std::string found = at(Tok::End) ? "end of input" : "'" + cur().text + "'";
            fail("expected identifier, found " + found, {"identifier"});
        }
        std::string s = cur().text;
        next();
        return s;
    }

    std::int64_t expect_int(bool allow_sign) {
        bool neg = false;
        if (allow_sign && at(Tok::Minus)) {
            neg = true;
            next();
        }
        const Token t = expect(Tok::Int);
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc{} || v > std::numeric_limits<std::int32_t>::max()) {
            errors_.push_back({t.span, "integer literal out of range", {}});
            throw SyntaxError{};
        }
        return neg ? -v : v;
    }

    static std::vector<std::string> item_starts() {
        return {"'type'", "variable declaration", "'define'", "'init_cond'", "'agent'", "'transitions'", "'fairness'",
                "'spec_obs'", "'protocol'"};
    }

    bool at_item_start() const {
        if (cur().kind != Tok::Ident) return false;
        if (is_item_keyword(cur().text)) return true;
        return peek(1).kind == Tok::Colon;
    }

    void synchronise(std::size_t before) {
        if (pos_ == before) next();
        while (!at(Tok::End) && !at_item_start()) next();
    }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) p.fail("nesting too deep");
        }
        ~DepthGuard() { --p.depth_; }
    };

    // --- declarations ------------------------------------------------------

    void parse_item(ModelIR& m) {
        const SourceSpan at_span = cur().span;
        if (!at(Tok::Ident)) fail("expected declaration, found '" + cur().text + "'", item_starts());
        const std::string word = cur().text;
        if (word == "type") {
            next();
            m.types.push_back(parse_type(at_span));
        } else if (word == "define") {
            next();
            DefineDecl d;
            d.origin.span = at_span;
            d.name = expect_ident();
            expect(Tok::Equals);
            d.body = state_expr();
            m.defines.push_back(std::move(d));
        } else if (word == "init_cond") {
            next();
            expect(Tok::Equals);
            Expr e = state_expr();
            if (m.init_cond) {
                errors_.push_back({at_span, "duplicate init_cond", {}});
                return;
            }
            m.init_cond = std::move(e);
        } else if (word == "agent") {
            next();
            AgentDecl a;
            a.origin.span = at_span;
            a.name = expect_ident();
            a.protocol = expect(Tok::String).text;
            expect(Tok::LParen);
            if (!at(Tok::RParen)) {
                a.bindings.push_back(expect_ident());
                while (at(Tok::Comma)) {
                    next();
                    a.bindings.push_back(expect_ident());
                }
            }
            expect(Tok::RParen);
            m.agents.push_back(std::move(a));
        } else if (word == "transitions") {
            next();
            Statement s = statement();
            if (m.transitions) {
                errors_.push_back({at_span, "duplicate transitions block", {}});
                return;
            }
            m.transitions = std::move(s);
        } else if (word == "fairness") {
            next();
            expect(Tok::Equals);
            FairnessDecl f;
            f.origin.span = at_span;
            f.condition = state_expr();
            m.fairness.push_back(std::move(f));
        } else if (word == "spec_obs") {
            next();
            expect(Tok::Equals);
            SpecDecl s;
            s.origin.span = at_span;
            s.label = expect(Tok::String).text;
            s.body = parse_spec_formula();
            m.specs.push_back(std::move(s));
        } else if (word == "protocol") {
            next();
            m.protocols.push_back(parse_protocol(at_span));
        } else if (peek(1).kind == Tok::Colon) {
            VarDecl v;
            v.origin.span = at_span;
            v.name = expect_ident();
            expect(Tok::Colon);
            v.type = expect_ident();
            m.vars.push_back(std::move(v));
        } else {
            fail("expected declaration, found '" + word + "'", item_starts());
        }
    }

    TypeDecl parse_type(SourceSpan at_span) {
        TypeDecl t;
        t.origin.span = at_span;
        std::string name = expect_ident();
        expect(Tok::Equals);
        expect(Tok::LBrace);
        if (at(Tok::Int) || at(Tok::Minus)) {
            t.kind = TypeDecl::Kind::Range;
            t.range.name = std::move(name);
            t.range.lo = static_cast<std::int32_t>(expect_int(true));
            expect(Tok::DotDot);
            t.range.hi = static_cast<std::int32_t>(expect_int(true));
        } else {
            t.kind = TypeDecl::Kind::Enum;
            t.enumeration.name = std::move(name);
            t.enumeration.constants.push_back(expect_ident());
            while (at(Tok::Comma)) {
                next();
                t.enumeration.constants.push_back(expect_ident());
            }
        }
        expect(Tok::RBrace);
        return t;
    }

    ProtocolDecl parse_protocol(SourceSpan at_span) {
        ProtocolDecl p;
        p.origin.span = at_span;
        p.name = expect(Tok::String).text;
        expect(Tok::LParen);
        if (!at(Tok::RParen)) {
            for (;;) {
                Param prm;
                prm.name = expect_ident();
                expect(Tok::Colon);
                prm.type = expect_ident();
                p.params.push_back(std::move(prm));
                if (!at(Tok::Comma)) break;
                next();
            }
        }
        expect(Tok::RParen);
        expect_word("begin");
        expect_word("do");
        p.rules.push_back(rule());
        while (at(Tok::Box)) {
            next();
            p.rules.push_back(rule());
        }
        expect_word("od");
        expect_word("end");
        return p;
    }

    ProtocolRule rule() {
        DepthGuard g(*this);
        ProtocolRule r;
        r.origin.span = cur().span;
        if (at_word("otherwise")) {
            next();
        } else {
            r.guard = state_expr();
        }
        expect(Tok::Arrow);
        if (at(Tok::LAct)) {
            next();
            r.action = expect_ident();
            expect(Tok::RAct);
        } else if (at_word("if")) {
            next();
            r.nested.push_back(rule());
            while (at(Tok::Box)) {
                next();
                r.nested.push_back(rule());
            }
            expect_word("fi");
        } else {
            fail("expected '<<action>>' or 'if'", {"'<<'", "'if'"});
        }
        return r;
    }

    // --- statements ---------------------------------------------------------

    Statement statement() {
        DepthGuard g(*this);
        const SourceSpan at_span = cur().span;
        if (at_word("skip")) {
            next();
            return Statement::skip(at_span);
        }
        if (at_word("begin")) {
            next();
            std::vector<Statement> body;
            while (!at_word("end")) {
                body.push_back(statement());
                if (at(Tok::Semi)) {
                    next();
                } else if (!at_word("end")) {
                    fail("expected ';' or 'end'", {"';'", "'end'"});
                }
            }
            next();
            return Statement::seq(std::move(body), at_span);
        }
        if (at_word("if")) {
            next();
            std::vector<GuardedBranch> branches;
            branches.push_back(branch());
            while (at(Tok::Box)) {
                next();
                branches.push_back(branch());
            }
            expect_word("fi");
            return Statement::choice(std::move(branches), at_span);
        }
        if (at(Tok::LNondet)) {
            next();
            std::vector<std::string> vars;
            vars.push_back(expect_ident());
            while (at(Tok::Comma)) {
                next();
                vars.push_back(expect_ident());
            }
            expect(Tok::Bar);
            Expr rel = state_expr();
            expect(Tok::RNondet);
            return Statement::nondet(std::move(vars), std::move(rel), at_span);
        }
        if (at(Tok::Ident) && peek(1).kind == Tok::Assign && !is_reserved_word(cur().text)) {
            std::string var = cur().text;
            next();
            next();
            return Statement::assign(std::move(var), state_expr(), at_span);
        }
        fail("expected statement", {"assignment", "'if'", "'[['", "'begin'", "'skip'"});
    }

    GuardedBranch branch() {
        GuardedBranch b;
        if (at_word("otherwise")) {
            next();
        } else {
            b.guard = state_expr();
        }
        expect(Tok::Arrow);
        b.body = statement();
        return b;
    }

    // --- expressions ----------------------------------------------------------
    //
    // Tightest first: arithmetic, comparison, neg / G / F / X, U / W (right),
    // /\, \/, => (right).

    Expr state_expr() {
        Term t = implies(false);
        return t.expr;
    }

    Term combine(ExprOp eop, LtlOp lop, Term a, Term b, SourceSpan at_span) {
        Term out;
        out.span = at_span;
        if (a.temporal() || b.temporal()) {
            out.formula = Formula::binary(lop, to_formula(a), to_formula(b));
        } else {
            out.expr = Expr::binary(eop, std::move(a.expr), std::move(b.expr), at_span);
        }
        return out;
    }

    Term implies(bool temporal) {
        DepthGuard g(*this);
        Term a = disjunction(temporal);
        if (at(Tok::Implies)) {
            const SourceSpan s = cur().span;
            next();
            Term b = implies(temporal);
            return combine(ExprOp::Implies, LtlOp::Implies, std::move(a), std::move(b), s);
        }
        return a;
    }

    Term disjunction(bool temporal) {
        Term a = conjunction(temporal);
        while (at(Tok::Or)) {
            const SourceSpan s = cur().span;
            next();
            Term b = conjunction(temporal);
            a = combine(ExprOp::Or, LtlOp::Or, std::move(a), std::move(b), s);
        }
        return a;
    }

    Term conjunction(bool temporal) {
        Term a = until(temporal);
        while (at(Tok::And)) {
            const SourceSpan s = cur().span;
            next();
            Term b = until(temporal);
            a = combine(ExprOp::And, LtlOp::And, std::move(a), std::move(b), s);
        }
        return a;
    }

    Term until(bool temporal) {
        DepthGuard g(*this);
        Term a = unary(temporal);
        if (temporal && (at_word("U") || at_word("W"))) {
            const bool weak = cur().text == "W";
            const SourceSpan s = cur().span;
            next();
            Term b = until(temporal);
            Formula fa = to_formula(a);
            Formula fb = to_formula(b);
            Term out;
            out.span = s;
            if (weak) {
                // a W b  ==  (a U b) \/ G(a /\ neg b)
                Formula strong = Formula::binary(LtlOp::Until, fa, fb);
                Formula forever =
                    Formula::unary(LtlOp::Globally, Formula::binary(LtlOp::And, fa, Formula::unary(LtlOp::Not, fb)));
                out.formula = Formula::binary(LtlOp::Or, strong, forever);
            } else {
                out.formula = Formula::binary(LtlOp::Until, fa, fb);
            }
            return out;
        }
        return a;
    }

    Term unary(bool temporal) {
        DepthGuard g(*this);
        const SourceSpan s = cur().span;
        if (at_word("neg")) {
            next();
            Term a = unary(temporal);
            Term out;
            out.span = s;
            if (a.temporal())
                out.formula = Formula::unary(LtlOp::Not, *a.formula);
            else
                out.expr = Expr::unary(ExprOp::Not, std::move(a.expr), s);
            return out;
        }
        if (at_word("G") || at_word("F") || at_word("X")) {
            if (!temporal) fail("temporal operator '" + cur().text + "' in a state expression");
            const LtlOp op = cur().text == "G" ? LtlOp::Globally : cur().text == "F" ? LtlOp::Finally : LtlOp::Next;
            next();
            Term a = unary(temporal);
            Term out;
            out.span = s;
            out.formula = Formula::unary(op, to_formula(a));
            return out;
        }
        return comparison(temporal);
    }

    Term comparison(bool temporal) {
        Term a = arithmetic(temporal);
        ExprOp op;
        switch (cur().kind) {
        case Tok::Eq: op = ExprOp::Eq; break;
        case Tok::Neq: op = ExprOp::Neq; break;
        case Tok::Lt: op = ExprOp::Lt; break;
        case Tok::Le: op = ExprOp::Le; break;
        case Tok::Gt: op = ExprOp::Gt; break;
        case Tok::Ge: op = ExprOp::Ge; break;
        default: return a;
        }
        const SourceSpan s = cur().span;
        next();
        Term b = arithmetic(temporal);
        if (a.temporal() || b.temporal()) fail("temporal formula used as a comparison operand");
        Term out;
        out.span = s;
        out.expr = Expr::binary(op, std::move(a.expr), std::move(b.expr), s);
        return out;
    }

    Term arithmetic(bool temporal) {
        Term a = primary(temporal);
        while (at(Tok::Plus) || at(Tok::Minus)) {
            const ExprOp op = at(Tok::Plus) ? ExprOp::Add : ExprOp::Sub;
            const SourceSpan s = cur().span;
            next();
            Term b = primary(temporal);
            if (a.temporal() || b.temporal()) fail("temporal formula used in arithmetic");
            a.expr = Expr::binary(op, std::move(a.expr), std::move(b.expr), s);
            a.span = s;
        }
        return a;
    }

    Term primary(bool temporal) {
        DepthGuard g(*this);
        const SourceSpan s = cur().span;
        Term out;
        out.span = s;
        if (at(Tok::Int)) {
            out.expr = Expr::integer(expect_int(false), s);
            return out;
        }
        if (at(Tok::LParen)) {
            next();
            Term inner = implies(temporal);
            expect(Tok::RParen);
            return inner;
        }
        if (at(Tok::Ident)) {
            const std::string name = cur().text;
            if (name == "True" || name == "False") {
                next();
                out.expr = Expr::boolean(name == "True", s);
                return out;
            }
            if (name == "A" && peek(1).kind == Tok::LParen) {
                fail("path quantifier only at top level");
            }
            if (is_reserved_word(name) && name != "A") {
                fail("expected expression, found keyword '" + name + "'", {"expression"});
            }
            next();
            if (at(Tok::Prime)) {
                next();
                out.expr = Expr::primed(name, s);
            } else if (at(Tok::Dot) && peek(1).kind == Tok::Ident) {
                next();
                std::string member = cur().text;
                next();
                out.expr = Expr::action(name, std::move(member), s);
            } else {
                out.expr = Expr::ident(name, s);
            }
            return out;
        }
        std::string found = at(Tok::End) ? "end of input" : "'" + cur().text + "'";
        fail("expected expression, found " + found, {"expression"});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    std::vector<ParseError>& errors_;
};

// ---------------------------------------------------------------------------
// Printing

enum Prec { kImplies = 1, kOr = 2, kAnd = 3, kUntil = 4, kUnary = 5, kCmp = 6, kArith = 7, kPrimary = 8 };

int expr_prec(const Expr& e) {
    switch (e.op) {
    case ExprOp::Implies: return kImplies;
    case ExprOp::Or: return kOr;
    case ExprOp::And: return kAnd;
    case ExprOp::Not: return kUnary;
    case ExprOp::Eq:
    case ExprOp::Neq:
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: return kCmp;
    case ExprOp::Add:
    case ExprOp::Sub: return kArith;
    default: return kPrimary;
    }
}

void print_expr(std::ostream& os, const Expr& e, int ctx) {
    const int p = expr_prec(e);
    const bool paren = p < ctx;
    if (paren) os << "(";
    switch (e.op) {
    case ExprOp::BoolLit: os << (e.value ? "True" : "False"); break;
    case ExprOp::IntLit: os << e.value; break;
    case ExprOp::Ident: os << e.name; break;
    case ExprOp::Primed: os << e.name << "'"; break;
    case ExprOp::Action: os << e.name << "." << e.member; break;
    case ExprOp::Not:
        os << "neg ";
        print_expr(os, e.args[0], kUnary);
        break;
    case ExprOp::Implies:
        print_expr(os, e.args[0], kImplies + 1);
        os << " => ";
        print_expr(os, e.args[1], kImplies);
        break;
    case ExprOp::Or:
    case ExprOp::And:
    case ExprOp::Add:
    case ExprOp::Sub:
        print_expr(os, e.args[0], p);
        os << " " << op_symbol(e.op) << " ";
        print_expr(os, e.args[1], p + 1);
        break;
    default:  // comparisons
        print_expr(os, e.args[0], kArith);
        os << " " << op_symbol(e.op) << " ";
        print_expr(os, e.args[1], kArith);
        break;
    }
    if (paren) os << ")";
}

int formula_prec(const Formula& f) {
    switch (f.op()) {
    case LtlOp::Implies: return kImplies;
    case LtlOp::Or: return kOr;
    case LtlOp::And: return kAnd;
    case LtlOp::Until:
    case LtlOp::Release: return kUntil;
    case LtlOp::Not:
    case LtlOp::Next:
    case LtlOp::Globally:
    case LtlOp::Finally: return kUnary;
    case LtlOp::Atom: return expr_prec(f.atom_expr());
    default: return kPrimary;
    }
}

void print_formula(std::ostream& os, const Formula& f, int ctx) {
    const int p = formula_prec(f);
    if (f.op() == LtlOp::Atom) {
        // An atom that is itself a connective would re-parse as LTL structure;
        // keep it grouped.
        const Expr& e = f.atom_expr();
        print_expr(os, e, e.is_connective() ? kPrimary : ctx);
        return;
    }
    const bool paren = p < ctx;
    if (paren) os << "(";
    switch (f.op()) {
    case LtlOp::True: os << "True"; break;
    case LtlOp::False: os << "False"; break;
    case LtlOp::Not:
    case LtlOp::Next:
    case LtlOp::Globally:
    case LtlOp::Finally: {
        const char* name = f.op() == LtlOp::Not ? "neg" : f.op() == LtlOp::Next ? "X" : f.op() == LtlOp::Globally ? "G" : "F";
        os << name << " ";
        print_formula(os, f.lhs(), kUnary);
        break;
    }
    case LtlOp::Implies:
        print_formula(os, f.lhs(), kImplies + 1);
        os << " => ";
        print_formula(os, f.rhs(), kImplies);
        break;
    case LtlOp::Until:
    case LtlOp::Release:
        print_formula(os, f.lhs(), kUntil + 1);
        os << (f.op() == LtlOp::Until ? " U " : " R ");
        print_formula(os, f.rhs(), kUntil);
        break;
    case LtlOp::Or:
    case LtlOp::And:
        print_formula(os, f.lhs(), p);
        os << (f.op() == LtlOp::Or ? " \\/ " : " /\\ ");
        print_formula(os, f.rhs(), p + 1);
        break;
    default: break;
    }
    if (paren) os << ")";
}

void indent(std::ostream& os, int n) {
    for (int i = 0; i < n; ++i) os << "  ";
}

void print_statement(std::ostream& os, const Statement& s, int ind) {
    switch (s.kind) {
    case Statement::Kind::Skip: os << "skip"; break;
    case Statement::Kind::Assign:
        os << s.target << " := ";
        print_expr(os, s.value, 0);
        break;
    case Statement::Kind::Nondet:
        os << "[[ ";
        for (std::size_t i = 0; i < s.vars.size(); ++i) os << (i ? ", " : "") << s.vars[i];
        os << " | ";
        print_expr(os, s.value, 0);
        os << " ]]";
        break;
    case Statement::Kind::Seq:
        os << "begin\n";
        for (std::size_t i = 0; i < s.body.size(); ++i) {
            indent(os, ind + 1);
            print_statement(os, s.body[i], ind + 1);
            os << (i + 1 < s.body.size() ? " ;\n" : "\n");
        }
        indent(os, ind);
        os << "end";
        break;
    case Statement::Kind::Choice:
        os << "if\n";
        for (std::size_t i = 0; i < s.branches.size(); ++i) {
            indent(os, ind);
            os << (i ? "[] " : "   ");
            if (s.branches[i].guard)
                print_expr(os, *s.branches[i].guard, 0);
            else
                os << "otherwise";
            os << " -> ";
            print_statement(os, s.branches[i].body, ind + 2);
            os << "\n";
        }
        indent(os, ind);
        os << "fi";
        break;
    }
}

void print_rules(std::ostream& os, const std::vector<ProtocolRule>& rules, int ind) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        indent(os, ind);
        os << (i ? "[] " : "   ");
        if (r.guard)
            print_expr(os, *r.guard, 0);
        else
            os << "otherwise";
        os << " -> ";
        if (r.is_nested()) {
            os << "if\n";
            print_rules(os, r.nested, ind + 2);
            indent(os, ind + 1);
            os << "fi\n";
        } else {
            os << "<<" << r.action << ">>\n";
        }
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

ParseResult<ModelIR> parse_model(std::string_view text) {
    ParseResult<ModelIR> r;
    auto toks = Lexer(text, r.errors).run();
    Parser p(std::move(toks), r.errors);
    ModelIR m = p.parse_model();
    if (r.errors.empty()) r.value = std::move(m);
    return r;
}

ParseResult<Formula> parse_formula(std::string_view text) {
    ParseResult<Formula> r;
    auto toks = Lexer(text, r.errors).run();
    Parser p(std::move(toks), r.errors);
    try {
        Formula f = p.parse_spec_formula();
        p.expect_end();
        if (r.errors.empty()) r.value = std::move(f);
    } catch (const SyntaxError&) {
    }
    return r;
}

ParseResult<Expr> parse_expr(std::string_view text) {
    ParseResult<Expr> r;
    auto toks = Lexer(text, r.errors).run();
    Parser p(std::move(toks), r.errors);
    try {
        Expr e = p.parse_state_expr();
        p.expect_end();
        if (r.errors.empty()) r.value = std::move(e);
    } catch (const SyntaxError&) {
    }
    return r;
}

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_expr(os, e, 0);
    return os.str();
}

std::string to_string(const Formula& f) {
    std::ostringstream os;
    print_formula(os, f, 0);
    return os.str();
}

std::string to_string(const Statement& s) {
    std::ostringstream os;
    print_statement(os, s, 0);
    return os.str();
}

std::string pretty_print(const ModelIR& m) {
    std::ostringstream os;
    for (const auto& t : m.types) {
        os << "type " << t.name() << " = {";
        if (t.kind == TypeDecl::Kind::Enum) {
            for (std::size_t i = 0; i < t.enumeration.constants.size(); ++i)
                os << (i ? ", " : "") << t.enumeration.constants[i];
        } else {
            if (t.range.lo < 0) os << " ";
            os << t.range.lo << ".." << t.range.hi;
        }
        os << "}\n";
    }
    if (!m.types.empty()) os << "\n";
    for (const auto& v : m.vars) os << v.name << " : " << v.type << "\n";
    if (!m.vars.empty()) os << "\n";
    for (const auto& d : m.defines) {
        os << "define " << d.name << " = ";
        print_expr(os, d.body, 0);
        os << "\n";
    }
    if (!m.defines.empty()) os << "\n";
    if (m.init_cond) {
        os << "init_cond = ";
        print_expr(os, *m.init_cond, 0);
        os << "\n\n";
    }
    for (const auto& a : m.agents) {
        os << "agent " << a.name << " " << quote(a.protocol) << " (";
        for (std::size_t i = 0; i < a.bindings.size(); ++i) os << (i ? ", " : "") << a.bindings[i];
        os << ")\n";
    }
    if (!m.agents.empty()) os << "\n";
    if (m.transitions) {
        os << "transitions\n";
        print_statement(os, *m.transitions, 0);
        os << "\n\n";
    }
    for (const auto& f : m.fairness) {
        os << "fairness = ";
        print_expr(os, f.condition, 0);
        os << "\n";
    }
    if (!m.fairness.empty()) os << "\n";
    for (const auto& s : m.specs) {
        os << "spec_obs = " << quote(s.label) << "\n  A( ";
        print_formula(os, s.body, 0);
        os << " )\n\n";
    }
    for (const auto& p : m.protocols) {
        os << "protocol " << quote(p.name) << " (";
        for (std::size_t i = 0; i < p.params.size(); ++i)
            os << (i ? ", " : "") << p.params[i].name << " : " << p.params[i].type;
        os << ")\nbegin\ndo\n";
        print_rules(os, p.rules, 0);
        os << "od\nend\n\n";
    }
    return os.str();
}

}  // namespace swapmc
