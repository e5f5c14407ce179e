// SPDX-License-Identifier: Apache-2.0
#include "rr/parser.hpp"

#include <array>
#include <cstdint>
#include <limits>

namespace rr {

namespace {

constexpr std::size_t kMaxArity = 255;
constexpr std::size_t kMaxDepth = 10000;

enum class Tok {
    Ident,     // lowercase identifier
    Var,       // uppercase/underscore identifier
    Int,       // unsigned digit run; sign handled by the parser
    Str,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Neck,      // :-
    Op,        // = == < <= > >= + - *
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;        // ident/var name, operator spelling, decoded string
    std::uint64_t number = 0;
    int line = 1;
    int column = 1;
};

bool ident_start(char c) { return c >= 'a' && c <= 'z'; }
bool var_start(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, std::string expected) const {
        throw SyntaxError(at.line, at.column, std::move(expected));
    }

private:
    void advance() {
        skip_trivia();
        current_ = Token{};
        current_.line = line_;
        current_.column = col_;
        if (pos_ >= text_.size()) {
            current_.kind = Tok::End;
            return;
        }
        char c = text_[pos_];
        if (ident_start(c)) {
            current_.kind = Tok::Ident;
            current_.text = read_word();
            return;
        }
        if (var_start(c)) {
            current_.kind = Tok::Var;
            current_.text = read_word();
            return;
        }
        if (c >= '0' && c <= '9') {
            read_int();
            return;
        }
        if (c == '"') {
            read_string();
            return;
        }
        switch (c) {
        case '(': one(Tok::LParen); return;
        case ')': one(Tok::RParen); return;
        case '[': one(Tok::LBracket); return;
        case ']': one(Tok::RBracket); return;
        case ',': one(Tok::Comma); return;
        case '|': one(Tok::Bar); return;
        case '.': one(Tok::Dot); return;
        case '+': case '*':
            current_.kind = Tok::Op;
            current_.text = std::string(1, c);
            bump();
            return;
        case '-':
            current_.kind = Tok::Op;
            current_.text = "-";
            bump();
            return;
        case '=':
            current_.kind = Tok::Op;
            bump();
            if (pos_ < text_.size() && text_[pos_] == '=') {
                bump();
                current_.text = "==";
            } else {
                current_.text = "=";
            }
            return;
        case '<':
            current_.kind = Tok::Op;
            bump();
            if (pos_ < text_.size() && text_[pos_] == '=') {
                bump();
                current_.text = "<=";
            } else {
                current_.text = "<";
            }
            return;
        case '>':
            current_.kind = Tok::Op;
            bump();
            if (pos_ < text_.size() && text_[pos_] == '=') {
                bump();
                current_.text = ">=";
            } else {
                current_.text = ">";
            }
            return;
        case ':':
            bump();
            if (pos_ < text_.size() && text_[pos_] == '-') {
                bump();
                current_.kind = Tok::Neck;
                return;
            }
            throw SyntaxError(current_.line, current_.column, "':-'");
        default:
            throw SyntaxError(current_.line, current_.column, "a term, operator or punctuation");
        }
    }

    void one(Tok kind) {
        current_.kind = kind;
        bump();
    }

    std::string read_word() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            bump();
        return std::string(text_.substr(start, pos_ - start));
    }

    void read_int() {
        current_.kind = Tok::Int;
        std::uint64_t v = 0;
        bool overflow = false;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
            std::uint64_t digit = static_cast<std::uint64_t>(text_[pos_] - '0');
            if (v > (std::numeric_limits<std::uint64_t>::max() - digit) / 10)
                overflow = true;
            else
                v = v * 10 + digit;
            bump();
        }
        if (overflow)
            throw SyntaxError(current_.line, current_.column, "an integer within 64 bits");
        current_.number = v;
    }

    void read_string() {
        current_.kind = Tok::Str;
        bump(); // opening quote
        std::string out;
        while (true) {
            if (pos_ >= text_.size())
                throw SyntaxError(current_.line, current_.column, "a closing '\"'");
            char c = text_[pos_];
            if (c == '\n')
                throw SyntaxError(current_.line, current_.column,
                                  "a closing '\"' before end of line");
            if (c == '"') {
                bump();
                break;
            }
            if (c == '\\') {
                bump();
                if (pos_ >= text_.size())
                    throw SyntaxError(current_.line, current_.column, "an escape character");
                char e = text_[pos_];
                switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                default:
                    throw SyntaxError(line_, col_, "one of the escapes \\\", \\\\ or \\n");
                }
                bump();
                continue;
            }
            out.push_back(c);
            bump();
        }
        current_.text = std::move(out);
    }

    void skip_trivia() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                break;
            }
        }
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token current_;
};

constexpr std::array<std::string_view, 12> kBuiltinPreds = {
    "=", "==", "<", "<=", ">", ">=", "is", "findall", "count", "not", "ask", "delegate",
};

bool is_operator_functor(std::string_view name) {
    return name == "=" || name == "==" || name == "<" || name == "<=" || name == ">" ||
           name == ">=" || name == "+" || name == "-" || name == "*";
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    RuleBase program() {
        RuleBase rb;
        while (lex_.peek().kind != Tok::End)
            rb.add(clause());
        return rb;
    }

    std::vector<Literal> query() {
        if (lex_.peek().kind == Tok::End)
            lex_.fail(lex_.peek(), "a query goal");
        std::vector<Literal> goals = body();
        expect(Tok::Dot, "'.'");
        if (lex_.peek().kind != Tok::End)
            lex_.fail(lex_.peek(), "end of input after '.'");
        return goals;
    }

    Term single_term() {
        Term t = expr();
        if (lex_.peek().kind != Tok::End)
            lex_.fail(lex_.peek(), "end of input after the term");
        return t;
    }

private:
    Rule clause() {
        Token head_tok = lex_.peek();
        Term head = expr();
        if (!head.is_atom())
            lex_.fail(head_tok, "a constant or compound rule head");
        if (is_builtin_pred_name(head.pred_name()) || is_operator_functor(head.pred_name()) ||
            head.pred_name() == "and")
            lex_.fail(head_tok, "a non-reserved predicate as rule head");
        Rule rule{std::move(head), {}};
        if (lex_.peek().kind == Tok::Neck) {
            lex_.take();
            rule.body = body();
        }
        expect(Tok::Dot, "'.'");
        return rule;
    }

    std::vector<Literal> body() {
        std::vector<Literal> lits;
        lits.push_back(literal());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            lits.push_back(literal());
        }
        return lits;
    }

    Literal literal() {
        // `not goal` negates; `not(...)` parses as a compound and is
        // normalized to the same thing.
        if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "not") {
            Token not_tok = lex_.take();
            if (lex_.peek().kind == Tok::LParen) {
                Term atom = compound_args("not");
                return normalize_negation(not_tok, std::move(atom));
            }
            Token goal_tok = lex_.peek();
            Term atom = expr();
            if (!atom.is_atom())
                lex_.fail(goal_tok, "an atom after 'not'");
            return Literal::neg(std::move(atom));
        }
        Token tok = lex_.peek();
        Term atom = expr();
        if (!atom.is_atom())
            lex_.fail(tok, "a goal atom");
        return normalize_negation(tok, std::move(atom));
    }

    Literal normalize_negation(const Token& at, Term atom) {
        if (atom.is_compound() && atom.functor() == "not" && atom.arity() == 1) {
            const Term& inner = atom.args()[0];
            if (!inner.is_atom())
                lex_.fail(at, "an atom under 'not'");
            return Literal::neg(inner);
        }
        return Literal::pos(std::move(atom));
    }

    Term expr() { return comparison(0); }

    // Comparison operators and `is` are non-associative and bind loosest.
    Term comparison(std::size_t depth) {
        Term lhs = additive(depth);
        const Token& t = lex_.peek();
        bool is_cmp_op = t.kind == Tok::Op &&
                         (t.text == "=" || t.text == "==" || t.text == "<" || t.text == "<=" ||
                          t.text == ">" || t.text == ">=");
        bool is_is = t.kind == Tok::Ident && t.text == "is";
        if (is_cmp_op || is_is) {
            Token op = lex_.take();
            Term rhs = additive(depth);
            return Term::compound(op.text, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Term additive(std::size_t depth) {
        Term lhs = multiplicative(depth);
        while (lex_.peek().kind == Tok::Op &&
               (lex_.peek().text == "+" || lex_.peek().text == "-")) {
            Token op = lex_.take();
            Term rhs = multiplicative(depth);
            lhs = Term::compound(op.text, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    Term multiplicative(std::size_t depth) {
        Term lhs = primary(depth);
        while (true) {
            const Token& t = lex_.peek();
            bool star = t.kind == Tok::Op && t.text == "*";
            bool word = t.kind == Tok::Ident && (t.text == "div" || t.text == "mod");
            if (!star && !word)
                return lhs;
            Token op = lex_.take();
            Term rhs = primary(depth);
            lhs = Term::compound(op.text, {std::move(lhs), std::move(rhs)});
        }
    }

    Term primary(std::size_t depth) {
        if (depth > kMaxDepth)
            lex_.fail(lex_.peek(), "a term no deeper than the nesting limit");
        const Token& t = lex_.peek();
        switch (t.kind) {
        case Tok::Int: {
            Token tok = lex_.take();
            if (tok.number > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
                lex_.fail(tok, "an integer within 64 bits");
            return Term::integer(static_cast<std::int64_t>(tok.number));
        }
        case Tok::Str: {
            Token tok = lex_.take();
            return Term::str(std::move(tok.text));
        }
        case Tok::Var: {
            Token tok = lex_.take();
            if (tok.text == "_")
                return Term::var("_G" + std::to_string(anon_counter_++), true);
            return Term::var(std::move(tok.text));
        }
        case Tok::LParen: {
            lex_.take();
            Term inner = comparison(depth + 1);
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::LBracket:
            return list(depth);
        case Tok::Ident: {
            Token tok = lex_.take();
            if (lex_.peek().kind == Tok::LParen)
                return compound_args(tok.text, depth);
            return Term::constant(std::move(tok.text));
        }
        case Tok::Op: {
            // `-5` is an integer literal; `=(X,a)` is an operator functor
            // in canonical form.
            Token tok = lex_.take();
            if (tok.text == "-" && lex_.peek().kind == Tok::Int) {
                Token num = lex_.take();
                std::uint64_t limit =
                    static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + 1;
                if (num.number > limit)
                    lex_.fail(num, "an integer within 64 bits");
                if (num.number == limit)
                    return Term::integer(std::numeric_limits<std::int64_t>::min());
                return Term::integer(-static_cast<std::int64_t>(num.number));
            }
            if (lex_.peek().kind == Tok::LParen)
                return compound_args(tok.text, depth);
            lex_.fail(tok, "a term");
        }
        default:
            lex_.fail(t, "a term");
        }
    }

    Term compound_args(const std::string& functor, std::size_t depth = 0) {
        expect(Tok::LParen, "'('");
        std::vector<Term> args;
        args.push_back(comparison(depth + 1));
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            if (args.size() == kMaxArity)
                lex_.fail(lex_.peek(), "no more than 255 arguments");
            args.push_back(comparison(depth + 1));
        }
        expect(Tok::RParen, "')' or ','");
        return Term::compound(functor, std::move(args));
    }

    Term list(std::size_t depth) {
        expect(Tok::LBracket, "'['");
        std::vector<Term> items;
        if (lex_.peek().kind != Tok::RBracket && lex_.peek().kind != Tok::Bar) {
            items.push_back(comparison(depth + 1));
            while (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                items.push_back(comparison(depth + 1));
            }
        }
        if (lex_.peek().kind == Tok::Bar) {
            Token bar = lex_.take();
            if (items.empty())
                lex_.fail(bar, "at least one item before '|'");
            Token tail_tok = lex_.peek();
            if (tail_tok.kind != Tok::Var)
                lex_.fail(tail_tok, "a variable list tail");
            Term tail = primary(depth + 1);
            expect(Tok::RBracket, "']'");
            return Term::list(std::move(items), std::move(tail));
        }
        expect(Tok::RBracket, "']' or ','");
        return Term::list(std::move(items));
    }

    void expect(Tok kind, std::string what) {
        if (lex_.peek().kind != kind)
            lex_.fail(lex_.peek(), std::move(what));
        lex_.take();
    }

    Lexer lex_;
    std::size_t anon_counter_ = 0;
};

} // namespace

SyntaxError::SyntaxError(int line, int column, std::string expected)
    : std::runtime_error("syntax error at " + std::to_string(line) + ":" +
                         std::to_string(column) + ": expected " + expected),
      line_(line), column_(column), expected_(std::move(expected)) {}

RuleBase parse_program(std::string_view text) { return Parser(text).program(); }

std::vector<Literal> parse_query(std::string_view text) { return Parser(text).query(); }

Term parse_term(std::string_view text) { return Parser(text).single_term(); }

bool is_builtin_pred_name(std::string_view name) {
    for (std::string_view b : kBuiltinPreds)
        if (name == b)
            return true;
    return false;
}

} // namespace rr
