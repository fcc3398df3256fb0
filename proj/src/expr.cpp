#include "qwave/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace qwave {

namespace {
enum class Kind { constant, variable, add, sub, mul, div, pow, exp, bracket };
}

struct Expr::Node {
    Kind kind;
    double value = 0.0;  // Kind::constant only
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_const(double v) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_var() {
    auto n = std::make_shared<Expr::Node>();
    n->kind = Kind::variable;
    return n;
}

bool const_value(const NodePtr& n, double* v) {
    if (n->kind != Kind::constant) return false;
    if (v) *v = n->value;
    return true;
}

NodePtr make_node(Kind k, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

// Smart constructors fold constants so symbolic derivatives stay small
// and never leave dead subtrees like 0*x^(-1) behind.
NodePtr make_add(NodePtr l, NodePtr r) {
    double a, b;
    if (const_value(l, &a) && const_value(r, &b)) return make_const(a + b);
    if (const_value(l, &a) && a == 0.0) return r;
    if (const_value(r, &b) && b == 0.0) return l;
    return make_node(Kind::add, std::move(l), std::move(r));
}

NodePtr make_sub(NodePtr l, NodePtr r) {
    double a, b;
    if (const_value(l, &a) && const_value(r, &b)) return make_const(a - b);
    if (const_value(r, &b) && b == 0.0) return l;
    return make_node(Kind::sub, std::move(l), std::move(r));
}

NodePtr make_mul(NodePtr l, NodePtr r) {
    double a, b;
    if (const_value(l, &a) && const_value(r, &b)) return make_const(a * b);
    if (const_value(l, &a)) {
        if (a == 0.0) return make_const(0.0);
        if (a == 1.0) return r;
    }
    if (const_value(r, &b)) {
        if (b == 0.0) return make_const(0.0);
        if (b == 1.0) return l;
    }
    return make_node(Kind::mul, std::move(l), std::move(r));
}

NodePtr make_div(NodePtr l, NodePtr r) {
    double a, b;
    if (const_value(l, &a) && const_value(r, &b) && b != 0.0) return make_const(a / b);
    if (const_value(l, &a) && a == 0.0) return make_const(0.0);
    if (const_value(r, &b) && b == 1.0) return l;
    return make_node(Kind::div, std::move(l), std::move(r));
}

NodePtr make_pow(NodePtr l, NodePtr r) {
    double a, b;
    if (const_value(r, &b)) {
        if (b == 0.0) return make_const(1.0);
        if (b == 1.0) return l;
        if (const_value(l, &a)) return make_const(std::pow(a, b));
    }
    return make_node(Kind::pow, std::move(l), std::move(r));
}

NodePtr make_fn(Kind k, NodePtr arg) {
    double a;
    if (const_value(arg, &a)) {
        if (k == Kind::exp) return make_const(std::exp(a));
        return make_const(std::sqrt(1.0 + a * a));
    }
    return make_node(k, std::move(arg), nullptr);
}

double eval_node(const Expr::Node& n, double x) {
    switch (n.kind) {
        case Kind::constant: return n.value;
        case Kind::variable: return x;
        case Kind::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case Kind::sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case Kind::mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case Kind::div: return eval_node(*n.lhs, x) / eval_node(*n.rhs, x);
        case Kind::pow: return std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x));
        case Kind::exp: return std::exp(eval_node(*n.lhs, x));
        case Kind::bracket: {
            const double v = eval_node(*n.lhs, x);
            return std::sqrt(1.0 + v * v);
        }
    }
    return 0.0;
}

bool node_is_constant(const Expr::Node& n) {
    switch (n.kind) {
        case Kind::constant: return true;
        case Kind::variable: return false;
        case Kind::exp:
        case Kind::bracket: return node_is_constant(*n.lhs);
        default: return node_is_constant(*n.lhs) && node_is_constant(*n.rhs);
    }
}

NodePtr diff_node(const NodePtr& n) {
    switch (n->kind) {
        case Kind::constant: return make_const(0.0);
        case Kind::variable: return make_const(1.0);
        case Kind::add: return make_add(diff_node(n->lhs), diff_node(n->rhs));
        case Kind::sub: return make_sub(diff_node(n->lhs), diff_node(n->rhs));
        case Kind::mul:
            return make_add(make_mul(diff_node(n->lhs), n->rhs),
                            make_mul(n->lhs, diff_node(n->rhs)));
        case Kind::div:
            return make_div(make_sub(make_mul(diff_node(n->lhs), n->rhs),
                                     make_mul(n->lhs, diff_node(n->rhs))),
                            make_mul(n->rhs, n->rhs));
        case Kind::pow: {
            if (!node_is_constant(*n->rhs))
                throw ExprError("derivative requires a constant exponent in '^'");
            const double e = eval_node(*n->rhs, 0.0);
            if (e == 0.0) return make_const(0.0);
            // d/dx f^e = e * f^(e-1) * f'
            return make_mul(make_const(e),
                            make_mul(make_pow(n->lhs, make_const(e - 1.0)),
                                     diff_node(n->lhs)));
        }
        case Kind::exp:
            return make_mul(make_fn(Kind::exp, n->lhs), diff_node(n->lhs));
        case Kind::bracket:
            // d/dx (1+f^2)^(1/2) = f f' / bracket(f)
            return make_div(make_mul(n->lhs, diff_node(n->lhs)),
                            make_fn(Kind::bracket, n->lhs));
    }
    return make_const(0.0);
}

NodePtr subst_node(const NodePtr& n, const NodePtr& inner) {
    switch (n->kind) {
        case Kind::constant: return n;
        case Kind::variable: return inner;
        case Kind::exp:
        case Kind::bracket: return make_fn(n->kind, subst_node(n->lhs, inner));
        case Kind::add: return make_add(subst_node(n->lhs, inner), subst_node(n->rhs, inner));
        case Kind::sub: return make_sub(subst_node(n->lhs, inner), subst_node(n->rhs, inner));
        case Kind::mul: return make_mul(subst_node(n->lhs, inner), subst_node(n->rhs, inner));
        case Kind::div: return make_div(subst_node(n->lhs, inner), subst_node(n->rhs, inner));
        case Kind::pow: return make_pow(subst_node(n->lhs, inner), subst_node(n->rhs, inner));
    }
    return n;
}

std::string to_string_node(const Expr::Node& n) {
    auto paren = [](const std::string& s) { return "(" + s + ")"; };
    switch (n.kind) {
        case Kind::constant: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            return buf;
        }
        case Kind::variable: return "x";
        case Kind::add: return paren(to_string_node(*n.lhs) + " + " + to_string_node(*n.rhs));
        case Kind::sub: return paren(to_string_node(*n.lhs) + " - " + to_string_node(*n.rhs));
        case Kind::mul: return paren(to_string_node(*n.lhs) + " * " + to_string_node(*n.rhs));
        case Kind::div: return paren(to_string_node(*n.lhs) + " / " + to_string_node(*n.rhs));
        case Kind::pow: return paren(to_string_node(*n.lhs) + "^" + to_string_node(*n.rhs));
        case Kind::exp: return "exp(" + to_string_node(*n.lhs) + ")";
        case Kind::bracket: return "bracket(" + to_string_node(*n.lhs) + ")";
    }
    return {};
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return e;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) {
        throw ExprError("expression parse error at position " + std::to_string(pos_) +
                        ": " + what + " in \"" + std::string(text_) + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr e = parse_term();
        for (;;) {
            if (eat('+')) e = make_add(e, parse_term());
            else if (eat('-')) e = make_sub(e, parse_term());
            else return e;
        }
    }

    NodePtr parse_term() {
        NodePtr e = parse_unary();
        for (;;) {
            if (eat('*')) e = make_mul(e, parse_unary());
            else if (eat('/')) e = make_div(e, parse_unary());
            else return e;
        }
    }

    NodePtr parse_unary() {
        if (eat('-')) return make_sub(make_const(0.0), parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) return make_pow(base, parse_unary());  // right-assoc, allows x^-2
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            std::string_view name = text_.substr(start, pos_ - start);
            if (name == "x") return make_var();
            if (name == "exp" || name == "bracket") {
                if (!eat('(')) fail("expected '(' after function name");
                NodePtr arg = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return make_fn(name == "exp" ? Kind::exp : Kind::bracket, arg);
            }
            pos_ = start;
            fail("unknown identifier \"" + std::string(name) + "\"");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const char* begin = text_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<size_t>(end - begin);
        return make_const(v);
    }
};

}  // namespace

Expr::Expr() : node_(make_const(0.0)) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) { return Expr(make_const(value)); }
Expr Expr::variable() { return Expr(make_var()); }

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }

double Expr::eval(double x) const { return eval_node(*node_, x); }

Expr Expr::derivative() const { return Expr(diff_node(node_)); }

Expr Expr::substitute(const Expr& inner) const {
    return Expr(subst_node(node_, inner.node_));
}

bool Expr::is_constant(double* value) const {
    if (!node_is_constant(*node_)) return false;
    if (value) *value = eval_node(*node_, 0.0);
    return true;
}

std::string Expr::to_string() const { return to_string_node(*node_); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_add(a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_sub(a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_mul(a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_div(a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make_sub(make_const(0.0), a.node_)); }
Expr pow(const Expr& base, const Expr& exponent) { return Expr(make_pow(base.node_, exponent.node_)); }
Expr exp(const Expr& arg) { return Expr(make_fn(Kind::exp, arg.node_)); }
Expr bracket(const Expr& arg) { return Expr(make_fn(Kind::bracket, arg.node_)); }

}  // namespace qwave
