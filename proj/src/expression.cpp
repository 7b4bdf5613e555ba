#include "roughstokes/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace roughstokes {

struct Expression::Node {
    enum class Kind { Number, X, Y, T, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
    double number = 0.0;
    double (*fn)(double) = nullptr;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double x, double y, double t) const
    {
        switch (kind) {
        case Kind::Number:
            return number;
        case Kind::X:
            return x;
        case Kind::Y:
            return y;
        case Kind::T:
            return t;
        case Kind::Neg:
            return -lhs->eval(x, y, t);
        case Kind::Add:
            return lhs->eval(x, y, t) + rhs->eval(x, y, t);
        case Kind::Sub:
            return lhs->eval(x, y, t) - rhs->eval(x, y, t);
        case Kind::Mul:
            return lhs->eval(x, y, t) * rhs->eval(x, y, t);
        case Kind::Div:
            return lhs->eval(x, y, t) / rhs->eval(x, y, t);
        case Kind::Pow:
            return std::pow(lhs->eval(x, y, t), rhs->eval(x, y, t));
        case Kind::Call:
            return fn(lhs->eval(x, y, t));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

struct Function {
    const char* name;
    double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"abs", [](double v) { return std::abs(v); }},
};

// expr   := term (('+' | '-') term)*
// term   := unary (('*' | '/') unary)*
// unary  := '-' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse()
    {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ExpressionError("expression \"" + s_ + "\": " + what + " at position " + std::to_string(pos_));
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) {
                n = make(Kind::Add, n, term());
            } else if (accept('-')) {
                n = make(Kind::Sub, n, term());
            } else {
                return n;
            }
        }
    }

    NodePtr term()
    {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) {
                n = make(Kind::Mul, n, unary());
            } else if (accept('/')) {
                n = make(Kind::Div, n, unary());
            } else {
                return n;
            }
        }
    }

    NodePtr unary()
    {
        if (accept('-')) {
            return make(Kind::Neg, unary());
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    NodePtr power()
    {
        NodePtr n = atom();
        if (accept('^')) {
            return make(Kind::Pow, n, unary());
        }
        return n;
    }

    NodePtr atom()
    {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end");
        }
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) {
                fail("missing ')'");
            }
            return n;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("bad number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Number;
            n->number = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string name;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) {
                name += s_[pos_++];
            }
            if (name == "x") {
                return make(Kind::X);
            }
            if (name == "y") {
                return make(Kind::Y);
            }
            if (name == "t") {
                return make(Kind::T);
            }
            if (name == "pi") {
                auto n = std::make_shared<Expression::Node>();
                n->kind = Kind::Number;
                n->number = std::numbers::pi;
                return n;
            }
            for (const auto& f : kFunctions) {
                if (name == f.name) {
                    if (!accept('(')) {
                        fail("expected '(' after " + name);
                    }
                    auto n = std::make_shared<Expression::Node>();
                    n->kind = Kind::Call;
                    n->fn = f.fn;
                    n->lhs = expr();
                    if (!accept(')')) {
                        fail("missing ')'");
                    }
                    return n;
                }
            }
            fail("unknown name '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(double x, double y, double t) const
{
    return root_->eval(x, y, t);
}

}  // namespace roughstokes
