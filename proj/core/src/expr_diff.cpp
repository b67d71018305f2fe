#include <cmath>
#include <utility>
#include <vector>

#include "obswin/error.hpp"
#include "obswin/expr.hpp"

namespace obswin {
namespace {

bool is_integer(double v) { return std::isfinite(v) && std::trunc(v) == v; }

/// Folds a constant only when the result is an ordinary finite number.
bool foldable(double v) { return std::isfinite(v); }

// A product a1*a2*...*ak*c with integer powers of equal bases merged.
struct Product {
  double coefficient = 1.0;
  std::vector<std::pair<Expr, double>> factors;  // base, exponent

  void absorb(const Expr& e) {
    if (e.is_constant()) {
      coefficient *= e.value();
      return;
    }
    if (e.kind() == NodeKind::Binary && e.binary_op() == BinaryOp::Mul) {
      absorb(e.child(0));
      absorb(e.child(1));
      return;
    }
    if (e.kind() == NodeKind::Unary && e.unary_op() == UnaryOp::Neg) {
      coefficient = -coefficient;
      absorb(e.child(0));
      return;
    }
    Expr base = e;
    double exponent = 1.0;
    if (e.kind() == NodeKind::Power && is_integer(e.value())) {
      base = e.child(0);
      exponent = e.value();
    }
    for (auto& [b, k] : factors) {
      if (structurally_equal(b, base)) {
        k += exponent;
        return;
      }
    }
    factors.emplace_back(std::move(base), exponent);
  }
};

Expr raw_mul(Expr a, Expr b) { return Expr::make_binary(BinaryOp::Mul, std::move(a), std::move(b)); }

double fold_unary(UnaryOp op, double a, bool& ok) {
  ok = true;
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Log:
      ok = a > 0.0;
      return ok ? std::log(a) : 0.0;
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Tanh: return std::tanh(a);
    case UnaryOp::Sqrt:
      ok = a >= 0.0;
      return ok ? std::sqrt(a) : 0.0;
  }
  ok = false;
  return 0.0;
}

}  // namespace

Expr add(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() + b.value()))
    return Expr::constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.kind() == NodeKind::Unary && b.unary_op() == UnaryOp::Neg) return sub(a, b.child(0));
  if (b.is_constant() && b.value() < 0.0) return sub(a, Expr::constant(-b.value()));
  return Expr::make_binary(BinaryOp::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() - b.value()))
    return Expr::constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  if (structurally_equal(a, b)) return Expr::constant(0.0);
  if (b.kind() == NodeKind::Unary && b.unary_op() == UnaryOp::Neg) return add(a, b.child(0));
  return Expr::make_binary(BinaryOp::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && foldable(a.value() * b.value()))
    return Expr::constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;

  Product prod;
  prod.absorb(a);
  prod.absorb(b);
  if (!foldable(prod.coefficient)) return raw_mul(std::move(a), std::move(b));
  if (prod.coefficient == 0.0) return Expr::constant(0.0);

  Expr body;
  bool have_body = false;
  for (auto& [base, k] : prod.factors) {
    if (k == 0.0) continue;
    Expr factor = pow(base, k);
    body = have_body ? raw_mul(body, factor) : factor;
    have_body = true;
  }
  if (!have_body) return Expr::constant(prod.coefficient);
  if (prod.coefficient == 1.0) return body;
  if (prod.coefficient == -1.0) return Expr::make_unary(UnaryOp::Neg, body);
  return raw_mul(Expr::constant(prod.coefficient), body);
}

Expr div(Expr a, Expr b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0 &&
      foldable(a.value() / b.value()))
    return Expr::constant(a.value() / b.value());
  if (a.is_constant(0.0) && !b.is_constant()) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  if (b.is_constant(-1.0)) return neg(a);
  if (structurally_equal(a, b) && !b.is_constant()) return Expr::constant(1.0);
  return Expr::make_binary(BinaryOp::Div, std::move(a), std::move(b));
}

Expr neg(Expr a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == NodeKind::Unary && a.unary_op() == UnaryOp::Neg) return a.child(0);
  if (a.kind() == NodeKind::Binary && a.binary_op() == BinaryOp::Mul && a.child(0).is_constant())
    return mul(Expr::constant(-a.child(0).value()), a.child(1));
  return Expr::make_unary(UnaryOp::Neg, std::move(a));
}

Expr pow(Expr base, double exponent) {
  if (exponent == 0.0) return Expr::constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    const double b = base.value();
    const bool defined = is_integer(exponent) ? !(b == 0.0 && exponent < 0.0)
                                              : (b > 0.0 || (b == 0.0 && exponent > 0.0));
    if (defined && foldable(std::pow(b, exponent))) return Expr::constant(std::pow(b, exponent));
  }
  if (base.kind() == NodeKind::Power && is_integer(base.value()) && is_integer(exponent))
    return pow(base.child(0), base.value() * exponent);
  return Expr::make_power(std::move(base), exponent);
}

Expr apply(UnaryOp op, Expr arg) {
  if (op == UnaryOp::Neg) return neg(std::move(arg));
  if (arg.is_constant()) {
    bool ok = false;
    const double v = fold_unary(op, arg.value(), ok);
    if (ok && foldable(v)) return Expr::constant(v);
  }
  return Expr::make_unary(op, std::move(arg));
}

Expr conditional(Expr lhs, Relation rel, Expr rhs, Expr then_branch, Expr else_branch) {
  if (lhs.is_constant() && rhs.is_constant()) {
    const double l = lhs.value();
    const double r = rhs.value();
    bool holds = false;
    switch (rel) {
      case Relation::Less: holds = l < r; break;
      case Relation::LessEqual: holds = l <= r; break;
      case Relation::Greater: holds = l > r; break;
      case Relation::GreaterEqual: holds = l >= r; break;
    }
    return holds ? then_branch : else_branch;
  }
  if (structurally_equal(then_branch, else_branch)) return then_branch;
  return Expr::make_conditional(std::move(lhs), rel, std::move(rhs), std::move(then_branch),
                                std::move(else_branch));
}

Expr simplify(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Variable:
    case NodeKind::Parameter: return e;
    case NodeKind::Unary: return apply(e.unary_op(), simplify(e.child(0)));
    case NodeKind::Binary: {
      Expr a = simplify(e.child(0));
      Expr b = simplify(e.child(1));
      switch (e.binary_op()) {
        case BinaryOp::Add: return add(std::move(a), std::move(b));
        case BinaryOp::Sub: return sub(std::move(a), std::move(b));
        case BinaryOp::Mul: return mul(std::move(a), std::move(b));
        case BinaryOp::Div: return div(std::move(a), std::move(b));
      }
      return e;
    }
    case NodeKind::Power: return pow(simplify(e.child(0)), e.value());
    case NodeKind::Conditional:
      return conditional(simplify(e.child(0)), e.relation(), simplify(e.child(1)),
                         simplify(e.child(2)), simplify(e.child(3)));
  }
  return e;
}

Expr differentiate(const Expr& e, std::size_t index) {
  switch (e.kind()) {
    case NodeKind::Constant:
    case NodeKind::Parameter: return Expr::constant(0.0);
    case NodeKind::Variable: return Expr::constant(e.index() == index ? 1.0 : 0.0);
    case NodeKind::Unary: {
      const Expr& u = e.child(0);
      Expr du = differentiate(u, index);
      if (du.is_constant(0.0)) return du;
      switch (e.unary_op()) {
        case UnaryOp::Neg: return neg(du);
        case UnaryOp::Exp: return mul(e, du);
        case UnaryOp::Log: return div(du, u);
        case UnaryOp::Sin: return mul(apply(UnaryOp::Cos, u), du);
        case UnaryOp::Cos: return neg(mul(apply(UnaryOp::Sin, u), du));
        case UnaryOp::Tanh: return mul(sub(Expr::constant(1.0), pow(e, 2.0)), du);
        case UnaryOp::Sqrt: return div(du, mul(Expr::constant(2.0), e));
      }
      return Expr::constant(0.0);
    }
    case NodeKind::Binary: {
      const Expr& u = e.child(0);
      const Expr& v = e.child(1);
      Expr du = differentiate(u, index);
      Expr dv = differentiate(v, index);
      switch (e.binary_op()) {
        case BinaryOp::Add: return add(du, dv);
        case BinaryOp::Sub: return sub(du, dv);
        case BinaryOp::Mul: return add(mul(du, v), mul(u, dv));
        case BinaryOp::Div:
          if (dv.is_constant(0.0)) return div(du, v);
          return div(sub(mul(du, v), mul(u, dv)), pow(v, 2.0));
      }
      return Expr::constant(0.0);
    }
    case NodeKind::Power: {
      const Expr& u = e.child(0);
      Expr du = differentiate(u, index);
      if (du.is_constant(0.0)) return du;
      const double k = e.value();
      return mul(mul(Expr::constant(k), pow(u, k - 1.0)), du);
    }
    case NodeKind::Conditional:
      return conditional(e.child(0), e.relation(), e.child(1), differentiate(e.child(2), index),
                         differentiate(e.child(3), index));
  }
  return Expr::constant(0.0);
}

}  // namespace obswin
