#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace roughstokes {

class ExpressionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arithmetic expression in the variables x, y and t (segment parameter in
/// [0, 1]). Supports + - * / ^, unary minus, parentheses, the constant pi and
/// sin cos tan exp log sqrt abs.
class Expression {
public:
    struct Node;

    explicit Expression(const std::string& text);

    double operator()(double x, double y, double t = 0.0) const;
    const std::string& text() const { return text_; }

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace roughstokes
