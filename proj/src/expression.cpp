#include "shellflow/expression.hpp"

#include "shellflow/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace shellflow {

struct Expression::Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp };
    Kind kind;
    double value = 0.0;  // Const
    int var = 0;         // Var: 0=t 1=x1 2=x2 3=y
    int exponent = 0;    // Pow
    std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

NodePtr constant(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Const;
    n->value = v;
    return n;
}

bool is_const(const NodePtr& n, double v) {
    return n && n->kind == Kind::Const && n->value == v;
}

// Light simplification keeps derivative trees small.
NodePtr add(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return make(Kind::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
    if (is_const(b, 0.0)) return a;
    return make(Kind::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return make(Kind::Mul, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
    if (is_const(a, 0.0)) return a;
    return make(Kind::Neg, std::move(a));
}

class Parser {
  public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr run() {
        auto e = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw ParseError("expression: trailing input at position " + std::to_string(pos_) +
                             " in '" + s_ + "'");
        return e;
    }

  private:
    const std::string& s_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        auto e = term();
        for (;;) {
            if (eat('+'))
                e = add(e, term());
            else if (eat('-'))
                e = sub(e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        auto e = unary();
        for (;;) {
            if (eat('*'))
                e = mul(e, unary());
            else if (eat('/'))
                e = make(Kind::Div, e, unary());
            else
                return e;
        }
    }

    NodePtr unary() {
        if (eat('-')) return neg(unary());
        return power();
    }

    NodePtr power() {
        auto base = atom();
        if (eat('^')) {
            skip_ws();
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (pos_ == start) throw ParseError("expression: '^' requires a nonnegative integer exponent");
            int e = std::atoi(s_.substr(start, pos_ - start).c_str());
            auto n = make(Kind::Pow, base);
            const_cast<Expression::Node*>(n.get())->exponent = e;
            return n;
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("expression: unexpected end of input in '" + s_ + "'");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t used = 0;
            double v = std::stod(s_.substr(pos_), &used);
            pos_ += used;
            return constant(v);
        }
        if (c == '(') {
            ++pos_;
            auto e = expr();
            if (!eat(')')) throw ParseError("expression: missing ')' in '" + s_ + "'");
            return e;
        }
        // identifier
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        std::string id = s_.substr(start, pos_ - start);
        if (id.empty())
            throw ParseError("expression: unexpected character '" + std::string(1, c) + "' in '" + s_ + "'");
        if (id == "t" || id == "x1" || id == "x2" || id == "y") {
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Var;
            n->var = id == "t" ? 0 : id == "x1" ? 1 : id == "x2" ? 2 : 3;
            return n;
        }
        if (id == "pi") return constant(3.14159265358979323846);
        if (id == "sin" || id == "cos" || id == "exp") {
            if (!eat('(')) throw ParseError("expression: '" + id + "' requires parentheses");
            auto arg = expr();
            if (!eat(')')) throw ParseError("expression: missing ')' after '" + id + "'");
            Kind k = id == "sin" ? Kind::Sin : id == "cos" ? Kind::Cos : Kind::Exp;
            return make(k, arg);
        }
        throw ParseError("expression: unknown identifier '" + id + "'");
    }
};

double eval_node(const Expression::Node* n, double t, double x1, double x2, double y) {
    switch (n->kind) {
    case Kind::Const: return n->value;
    case Kind::Var: return n->var == 0 ? t : n->var == 1 ? x1 : n->var == 2 ? x2 : y;
    case Kind::Add: return eval_node(n->lhs.get(), t, x1, x2, y) + eval_node(n->rhs.get(), t, x1, x2, y);
    case Kind::Sub: return eval_node(n->lhs.get(), t, x1, x2, y) - eval_node(n->rhs.get(), t, x1, x2, y);
    case Kind::Mul: return eval_node(n->lhs.get(), t, x1, x2, y) * eval_node(n->rhs.get(), t, x1, x2, y);
    case Kind::Div: return eval_node(n->lhs.get(), t, x1, x2, y) / eval_node(n->rhs.get(), t, x1, x2, y);
    case Kind::Neg: return -eval_node(n->lhs.get(), t, x1, x2, y);
    case Kind::Pow: return std::pow(eval_node(n->lhs.get(), t, x1, x2, y), n->exponent);
    case Kind::Sin: return std::sin(eval_node(n->lhs.get(), t, x1, x2, y));
    case Kind::Cos: return std::cos(eval_node(n->lhs.get(), t, x1, x2, y));
    case Kind::Exp: return std::exp(eval_node(n->lhs.get(), t, x1, x2, y));
    }
    return 0.0;
}

NodePtr diff_node(const NodePtr& n, int var) {
    switch (n->kind) {
    case Kind::Const: return constant(0.0);
    case Kind::Var: return constant(n->var == var ? 1.0 : 0.0);
    case Kind::Add: return add(diff_node(n->lhs, var), diff_node(n->rhs, var));
    case Kind::Sub: return sub(diff_node(n->lhs, var), diff_node(n->rhs, var));
    case Kind::Mul:
        return add(mul(diff_node(n->lhs, var), n->rhs), mul(n->lhs, diff_node(n->rhs, var)));
    case Kind::Div: {
        auto num = sub(mul(diff_node(n->lhs, var), n->rhs), mul(n->lhs, diff_node(n->rhs, var)));
        auto den = make(Kind::Pow, n->rhs);
        const_cast<Expression::Node*>(den.get())->exponent = 2;
        return make(Kind::Div, num, den);
    }
    case Kind::Neg: return neg(diff_node(n->lhs, var));
    case Kind::Pow: {
        if (n->exponent == 0) return constant(0.0);
        auto drop = make(Kind::Pow, n->lhs);
        const_cast<Expression::Node*>(drop.get())->exponent = n->exponent - 1;
        return mul(constant(static_cast<double>(n->exponent)), mul(drop, diff_node(n->lhs, var)));
    }
    case Kind::Sin: return mul(make(Kind::Cos, n->lhs), diff_node(n->lhs, var));
    case Kind::Cos: return neg(mul(make(Kind::Sin, n->lhs), diff_node(n->lhs, var)));
    case Kind::Exp: return mul(make(Kind::Exp, n->lhs), diff_node(n->lhs, var));
    }
    return constant(0.0);
}

} // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.root_ = Parser(text).run();
    e.text_ = text;
    return e;
}

double Expression::eval(double t, double x1, double x2, double y) const {
    if (!root_) return 0.0;
    return eval_node(root_.get(), t, x1, x2, y);
}

Expression Expression::derivative(const std::string& var) const {
    int v = var == "t" ? 0 : var == "x1" ? 1 : var == "x2" ? 2 : var == "y" ? 3 : -1;
    if (v < 0) throw ParseError("expression: unknown differentiation variable '" + var + "'");
    Expression d;
    if (root_) d.root_ = diff_node(root_, v);
    d.text_ = "d/d" + var + "(" + text_ + ")";
    return d;
}

} // namespace shellflow
