#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qwave {

/// Error raised when a closed-form expression cannot be parsed,
/// differentiated, or evaluated.
class ExprError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed-form expression in one variable `x`.
///
/// Grammar: numeric constants, x, + - * / ^ (right-associative power),
/// exp(e), bracket(e) = (1 + e^2)^(1/2), parentheses, unary minus.
///
/// Expressions are immutable values backed by a shared AST; copying is
/// cheap. Differentiation is symbolic and requires every exponent of `^`
/// to be a constant subexpression.
class Expr {
public:
    Expr();  // constant 0

    static Expr constant(double value);
    static Expr variable();
    static Expr parse(std::string_view text);

    double eval(double x) const;

    /// Symbolic d/dx. Throws ExprError for non-constant exponents.
    Expr derivative() const;

    /// Replace the variable by another expression (composition).
    Expr substitute(const Expr& inner) const;

    /// True when the expression contains no variable; if so *value is set.
    bool is_constant(double* value = nullptr) const;

    std::string to_string() const;

    friend Expr operator+(const Expr&, const Expr&);
    friend Expr operator-(const Expr&, const Expr&);
    friend Expr operator*(const Expr&, const Expr&);
    friend Expr operator/(const Expr&, const Expr&);
    friend Expr operator-(const Expr&);
    friend Expr pow(const Expr& base, const Expr& exponent);
    friend Expr exp(const Expr& arg);
    friend Expr bracket(const Expr& arg);

    struct Node;  // opaque; defined in expr.cpp

private:
    explicit Expr(std::shared_ptr<const Node> node);
    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr&, const Expr&);
Expr operator-(const Expr&, const Expr&);
Expr operator*(const Expr&, const Expr&);
Expr operator/(const Expr&, const Expr&);
Expr operator-(const Expr&);
Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& arg);
Expr bracket(const Expr& arg);

}  // namespace qwave
