#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lab/errors.hpp"

namespace lab::dsl {

enum class NodeKind { constant, variable, loop_var, negate, add, sub, mul, div, pow, call, sum };

/// Expression tree. Field use by kind:
///   constant  value
///   variable  x[name + offset]; empty name means the literal index `offset`
///   loop_var  name
///   call      name (function), children[0]
///   sum       name (loop variable), lo..hi, children[0]
///   operators children[0], children[1] (negate has one child)
/// Source positions are informational and ignored by equality.
struct Node {
    NodeKind kind = NodeKind::constant;
    double value = 0.0;
    std::string name;
    long offset = 0;
    long lo = 0;
    long hi = 0;
    std::vector<Node> children;
    std::size_t line = 1;
    std::size_t column = 1;

    friend bool operator==(const Node& a, const Node& b);
};

inline constexpr std::string_view kFunctions[] = {"sqrt", "sin", "cos", "exp", "abs", "log"};
bool is_function(std::string_view name);
/// Names that cannot be loop variables.
bool is_reserved(std::string_view name);

class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found,
               const std::string& detail = {});

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    const std::string& found() const noexcept { return found_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::vector<std::string> expected_;
    std::string found_;
};

/// Precedence, loosest first: + -, * /, unary -, ^ (right-associative).
/// Negation of a literal folds into the literal.
Node parse_expression(std::string_view source);

/// Minimal-parenthesis text that parses back to an equal tree.
std::string to_string(const Node& node);

}  // namespace lab::dsl
