#pragma once

#include <memory>
#include <string>

namespace shellflow {

/// Tiny arithmetic expression language for forcing terms and initial data.
///
/// Grammar (documented in the README):
///   expr    := term (('+'|'-') term)*
///   term    := unary (('*'|'/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' integer)?
///   atom    := number | var | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp
///   var     := t | x1 | x2 | y
///
/// Expressions are closed under the symbolic derivatives needed by the
/// diagnostics (d/dt, d/dx1, d/dx2, d/dy).
class Expression {
  public:
    Expression() = default;

    static Expression parse(const std::string& text); // throws ParseError

    bool empty() const { return !root_; }
    double eval(double t, double x1, double x2, double y) const;
    Expression derivative(const std::string& var) const;
    std::string text() const { return text_; }

    struct Node;

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

} // namespace shellflow
