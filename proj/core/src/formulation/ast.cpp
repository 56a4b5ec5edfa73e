#include "lab/formulation/ast.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace lab::dsl {

bool operator==(const Node& a, const Node& b) {
    return a.kind == b.kind && a.value == b.value && a.name == b.name && a.offset == b.offset && a.lo == b.lo &&
           a.hi == b.hi && a.children == b.children;
}

bool is_function(std::string_view name) {
    return std::find(std::begin(kFunctions), std::end(kFunctions), name) != std::end(kFunctions);
}

bool is_reserved(std::string_view name) {
    return name == "x" || name == "pi" || name == "e" || name == "sum" || is_function(name);
}

ParseError::ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found,
                       const std::string& detail)
    : Error(fmt::format("syntax error at line {}, column {}: {}found {}{}", line, column,
                        expected.empty() ? std::string() : fmt::format("expected one of {{{}}}, ", fmt::join(expected, ", ")),
                        found, detail.empty() ? std::string() : " (" + detail + ")")),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

enum class Tok { number, integer, ident, plus, minus, star, slash, caret, lparen, rparen, lbracket, rbracket, comma,
                 equals, dotdot, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    double number = 0.0;
    long integer = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::string describe(const Token& t) {
    if (t.kind == Tok::end) return "end of input";
    return fmt::format("'{}'", t.text);
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.column = column_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && next_is_digit(1))) {
                lex_number(t);
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos_;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
                t.kind = Tok::ident;
                t.text = std::string(src_.substr(start, pos_ - start));
            } else if (c == '.' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '.') {
                advance();
                advance();
                t.kind = Tok::dotdot;
                t.text = "..";
            } else {
                t.text = std::string(1, c);
                switch (c) {
                    case '+': t.kind = Tok::plus; break;
                    case '-': t.kind = Tok::minus; break;
                    case '*': t.kind = Tok::star; break;
                    case '/': t.kind = Tok::slash; break;
                    case '^': t.kind = Tok::caret; break;
                    case '(': t.kind = Tok::lparen; break;
                    case ')': t.kind = Tok::rparen; break;
                    case '[': t.kind = Tok::lbracket; break;
                    case ']': t.kind = Tok::rbracket; break;
                    case ',': t.kind = Tok::comma; break;
                    case '=': t.kind = Tok::equals; break;
                    default: throw ParseError(t.line, t.column, {}, describe(t), "unexpected character");
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

private:
    bool next_is_digit(std::size_t ahead) const {
        return pos_ + ahead < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + ahead]));
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }

    void lex_number(Token& t) {
        const std::size_t start = pos_;
        bool integral = true;
        while (next_is_digit(0)) advance();
        // A '.' followed by another '.' is a range operator, not a decimal point.
        if (pos_ < src_.size() && src_[pos_] == '.' && next_is_digit(1)) {
            integral = false;
            advance();
            while (next_is_digit(0)) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t ahead = 1;
            if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '+' || src_[pos_ + 1] == '-')) ahead = 2;
            if (next_is_digit(ahead)) {
                integral = false;
                for (std::size_t k = 0; k < ahead; ++k) advance();
                while (next_is_digit(0)) advance();
            }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        const char* first = t.text.data();
        const char* last = first + t.text.size();
        if (std::from_chars(first, last, t.number).ec != std::errc{} || !std::isfinite(t.number)) {
            throw ParseError(t.line, t.column, {}, describe(t), "number out of range");
        }
        t.kind = Tok::number;
        if (integral) {
            if (std::from_chars(first, last, t.integer).ec == std::errc{}) t.kind = Tok::integer;
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

const std::vector<std::string> kOperandStart = {"number", "identifier", "x[...]", "(", "-", "+"};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    Node parse() {
        Node n = expression();
        if (peek().kind != Tok::end) {
            throw error({"+", "-", "*", "/", "^", "end of input"});
        }
        return n;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    Token take() { return tokens_[pos_ == tokens_.size() - 1 ? pos_ : pos_++]; }
    bool accept(Tok k) {
        if (peek().kind != k) return false;
        take();
        return true;
    }

    ParseError error(std::vector<std::string> expected, const std::string& detail = {}) const {
        return ParseError(peek().line, peek().column, std::move(expected), describe(peek()), detail);
    }

    Token expect(Tok k, const char* what) {
        if (peek().kind != k) throw error({what});
        return take();
    }

    static Node make(NodeKind kind, const Token& at) {
        Node n;
        n.kind = kind;
        n.line = at.line;
        n.column = at.column;
        return n;
    }

    static Node binary(NodeKind kind, const Token& at, Node lhs, Node rhs) {
        Node n = make(kind, at);
        n.children.push_back(std::move(lhs));
        n.children.push_back(std::move(rhs));
        return n;
    }

    Node expression() {
        Node lhs = term();
        for (;;) {
            const Token op = peek();
            if (op.kind == Tok::plus || op.kind == Tok::minus) {
                take();
                lhs = binary(op.kind == Tok::plus ? NodeKind::add : NodeKind::sub, op, std::move(lhs), term());
            } else {
                return lhs;
            }
        }
    }

    Node term() {
        Node lhs = unary();
        for (;;) {
            const Token op = peek();
            if (op.kind == Tok::star || op.kind == Tok::slash) {
                take();
                lhs = binary(op.kind == Tok::star ? NodeKind::mul : NodeKind::div, op, std::move(lhs), unary());
            } else {
                return lhs;
            }
        }
    }

    Node unary() {
        const Token op = peek();
        if (op.kind == Tok::plus) {
            take();
            return unary();
        }
        if (op.kind == Tok::minus) {
            take();
            Node operand = unary();
            if (operand.kind == NodeKind::constant) {
                operand.value = -operand.value;
                operand.line = op.line;
                operand.column = op.column;
                return operand;
            }
            Node n = make(NodeKind::negate, op);
            n.children.push_back(std::move(operand));
            return n;
        }
        return power();
    }

    Node power() {
        Node base = primary();
        const Token op = peek();
        if (op.kind == Tok::caret) {
            take();
            return binary(NodeKind::pow, op, std::move(base), unary());
        }
        return base;
    }

    Node primary() {
        const Token t = peek();
        switch (t.kind) {
            case Tok::number:
            case Tok::integer: {
                take();
                Node n = make(NodeKind::constant, t);
                n.value = t.number;
                return n;
            }
            case Tok::lparen: {
                take();
                Node inner = expression();
                if (peek().kind != Tok::rparen) throw error({")", "+", "-", "*", "/", "^"});
                take();
                return inner;
            }
            case Tok::ident: return identifier();
            default: throw error(kOperandStart);
        }
    }

    Node identifier() {
        const Token t = take();
        if (t.text == "x") return variable(t);
        if (t.text == "pi" || t.text == "e") {
            Node n = make(NodeKind::constant, t);
            n.value = t.text == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
            return n;
        }
        if (t.text == "sum") return reduction(t);
        if (is_function(t.text)) {
            expect(Tok::lparen, "(");
            Node n = make(NodeKind::call, t);
            n.name = t.text;
            n.children.push_back(expression());
            if (peek().kind != Tok::rparen) throw error({")", "+", "-", "*", "/", "^"});
            take();
            return n;
        }
        Node n = make(NodeKind::loop_var, t);
        n.name = t.text;
        return n;
    }

    long signed_offset() {
        const Token sign = take();
        const Token value = expect(Tok::integer, "integer");
        return sign.kind == Tok::minus ? -value.integer : value.integer;
    }

    Node variable(const Token& at) {
        expect(Tok::lbracket, "[");
        Node n = make(NodeKind::variable, at);
        if (peek().kind == Tok::integer) {
            n.offset = take().integer;
        } else if (peek().kind == Tok::ident) {
            n.name = take().text;
            if (peek().kind == Tok::plus || peek().kind == Tok::minus) n.offset = signed_offset();
        } else {
            throw error({"integer", "identifier"});
        }
        if (peek().kind != Tok::rbracket) throw error(n.name.empty() ? std::vector<std::string>{"]"}
                                                                     : std::vector<std::string>{"]", "+", "-"});
        take();
        return n;
    }

    Node reduction(const Token& at) {
        expect(Tok::lparen, "(");
        Node n = make(NodeKind::sum, at);
        n.name = expect(Tok::ident, "identifier").text;
        expect(Tok::equals, "=");
        n.lo = bound();
        expect(Tok::dotdot, "..");
        n.hi = bound();
        expect(Tok::comma, ",");
        n.children.push_back(expression());
        if (peek().kind != Tok::rparen) throw error({")", "+", "-", "*", "/", "^"});
        take();
        return n;
    }

    long bound() {
        bool negative = false;
        if (peek().kind == Tok::minus) {
            take();
            negative = true;
        }
        const long v = expect(Tok::integer, "integer").integer;
        return negative ? -v : v;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

int precedence(const Node& n) {
    switch (n.kind) {
        case NodeKind::add:
        case NodeKind::sub: return 1;
        case NodeKind::mul:
        case NodeKind::div: return 2;
        case NodeKind::negate: return 3;
        case NodeKind::constant: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
        case NodeKind::pow: return 4;
        default: return 5;
    }
}

std::string print(const Node& n);

std::string wrap(const Node& child, bool parens) { return parens ? "(" + print(child) + ")" : print(child); }

std::string print(const Node& n) {
    switch (n.kind) {
        case NodeKind::constant: return fmt::format("{}", n.value);
        case NodeKind::variable:
            if (n.name.empty()) return fmt::format("x[{}]", n.offset);
            if (n.offset == 0) return fmt::format("x[{}]", n.name);
            return fmt::format("x[{}{}{}]", n.name, n.offset < 0 ? "-" : "+", std::abs(n.offset));
        case NodeKind::loop_var: return n.name;
        case NodeKind::call: return fmt::format("{}({})", n.name, print(n.children[0]));
        case NodeKind::sum: return fmt::format("sum({}={}..{}, {})", n.name, n.lo, n.hi, print(n.children[0]));
        case NodeKind::negate: {
            // The operand of '-' is parsed as a unary; a literal operand would fold.
            const Node& c = n.children[0];
            return "-" + wrap(c, precedence(c) < 3 || c.kind == NodeKind::constant);
        }
        case NodeKind::pow: {
            const Node& b = n.children[0];
            const Node& x = n.children[1];
            return wrap(b, precedence(b) <= 4) + "^" + wrap(x, precedence(x) < 3);
        }
        case NodeKind::add:
        case NodeKind::sub:
        case NodeKind::mul:
        case NodeKind::div: {
            const int p = precedence(n);
            const char* op = n.kind == NodeKind::add ? " + " : n.kind == NodeKind::sub ? " - " : n.kind == NodeKind::mul ? "*" : "/";
            const Node& l = n.children[0];
            const Node& r = n.children[1];
            // Left-associative: the right operand needs parentheses at equal precedence.
            return wrap(l, precedence(l) < p) + op + wrap(r, precedence(r) <= p);
        }
    }
    return {};
}

}  // namespace

Node parse_expression(std::string_view source) {
    Parser parser(Lexer(source).run());
    return parser.parse();
}

std::string to_string(const Node& node) { return print(node); }

}  // namespace lab::dsl
