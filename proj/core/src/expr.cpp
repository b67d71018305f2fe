#include "obswin/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "obswin/error.hpp"

namespace obswin {

ParseError::ParseError(Kind kind, std::string message, int line, int column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
            message),
      kind_(kind),
      line_(line),
      column_(column),
      detail_(std::move(message)) {}

DomainError::DomainError(std::string message, std::string subtree)
    : Error(message + " in '" + subtree + "'"), subtree_(std::move(subtree)) {}

SpecError::SpecError(Kind kind, std::string message, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      kind_(kind),
      line_(line) {}

Expr::Expr() : Expr(constant(0.0)) {}

Expr Expr::constant(double value) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Constant;
  node->value = value;
  return Expr(std::move(node));
}

Expr Expr::variable(std::size_t index) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Variable;
  node->index = index;
  return Expr(std::move(node));
}

Expr Expr::parameter(std::string name) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Parameter;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::make_unary(UnaryOp op, Expr arg) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Unary;
  node->unary = op;
  node->children = {std::move(arg)};
  return Expr(std::move(node));
}

Expr Expr::make_binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Binary;
  node->binary = op;
  node->children = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(node));
}

Expr Expr::make_power(Expr base, double exponent) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Power;
  node->value = exponent;
  node->children = {std::move(base)};
  return Expr(std::move(node));
}

Expr Expr::make_conditional(Expr lhs, Relation rel, Expr rhs, Expr then_branch,
                            Expr else_branch) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::Conditional;
  node->relation = rel;
  node->children = {std::move(lhs), std::move(rhs), std::move(then_branch),
                    std::move(else_branch)};
  return Expr(std::move(node));
}

namespace {

bool holds(Relation rel, double lhs, double rhs) {
  switch (rel) {
    case Relation::Less: return lhs < rhs;
    case Relation::LessEqual: return lhs <= rhs;
    case Relation::Greater: return lhs > rhs;
    case Relation::GreaterEqual: return lhs >= rhs;
  }
  return false;
}

bool is_integer(double v) { return std::isfinite(v) && std::trunc(v) == v; }

double eval_unary(UnaryOp op, double a, const Expr& e) {
  switch (op) {
    case UnaryOp::Neg: return -a;
    case UnaryOp::Exp: return std::exp(a);
    case UnaryOp::Log:
      if (!(a > 0.0)) throw DomainError("log of nonpositive value", to_string(e));
      return std::log(a);
    case UnaryOp::Sin: return std::sin(a);
    case UnaryOp::Cos: return std::cos(a);
    case UnaryOp::Tanh: return std::tanh(a);
    case UnaryOp::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of negative value", to_string(e));
      return std::sqrt(a);
  }
  return 0.0;
}

double eval_power(double base, double exponent, const Expr& e) {
  if (is_integer(exponent)) {
    if (base == 0.0 && exponent < 0.0) throw DomainError("division by zero", to_string(e));
    return std::pow(base, exponent);
  }
  if (base < 0.0) throw DomainError("negative base raised to a real power", to_string(e));
  if (base == 0.0 && exponent < 0.0) throw DomainError("division by zero", to_string(e));
  return std::pow(base, exponent);
}

struct Evaluator {
  std::span<const double> x;
  const ParamEnv& env;
  const EvalOptions& opts;

  double operator()(const Expr& e) const {
    switch (e.kind()) {
      case NodeKind::Constant: return e.value();
      case NodeKind::Variable:
        if (e.index() >= x.size())
          throw PreconditionError("variable x" + std::to_string(e.index() + 1) +
                                  " outside state of dimension " + std::to_string(x.size()));
        return x[e.index()];
      case NodeKind::Parameter: {
        auto it = env.find(e.name());
        if (it == env.end()) throw PreconditionError("parameter '" + e.name() + "' is not bound");
        return it->second;
      }
      case NodeKind::Unary: return eval_unary(e.unary_op(), (*this)(e.child(0)), e);
      case NodeKind::Binary: {
        const double a = (*this)(e.child(0));
        const double b = (*this)(e.child(1));
        switch (e.binary_op()) {
          case BinaryOp::Add: return a + b;
          case BinaryOp::Sub: return a - b;
          case BinaryOp::Mul: return a * b;
          case BinaryOp::Div:
            if (b == 0.0) throw DomainError("division by zero", to_string(e));
            return a / b;
        }
        return 0.0;
      }
      case NodeKind::Power: return eval_power((*this)(e.child(0)), e.value(), e);
      case NodeKind::Conditional: {
        const double lhs = (*this)(e.child(0));
        const double rhs = (*this)(e.child(1));
        bool take_then = holds(e.relation(), lhs, rhs);
        if (opts.seam_branch != SeamBranch::Natural && std::abs(lhs - rhs) <= opts.seam_margin)
          take_then = opts.seam_branch == SeamBranch::Then;
        return take_then ? (*this)(e.child(2)) : (*this)(e.child(3));
      }
    }
    return 0.0;
  }
};

// Precedence levels used by the printer.
constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecNeg = 3;
constexpr int kPrecPow = 4;
constexpr int kPrecAtom = 5;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int precedence(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? kPrecNeg : kPrecAtom;
    case NodeKind::Variable:
    case NodeKind::Parameter:
    case NodeKind::Conditional: return kPrecAtom;
    case NodeKind::Unary: return e.unary_op() == UnaryOp::Neg ? kPrecNeg : kPrecAtom;
    case NodeKind::Binary:
      return (e.binary_op() == BinaryOp::Add || e.binary_op() == BinaryOp::Sub) ? kPrecAdd
                                                                                : kPrecMul;
    case NodeKind::Power: return kPrecPow;
  }
  return kPrecAtom;
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tanh: return "tanh";
    case UnaryOp::Sqrt: return "sqrt";
  }
  return "?";
}

const char* relation_name(Relation rel) {
  switch (rel) {
    case Relation::Less: return "<";
    case Relation::LessEqual: return "<=";
    case Relation::Greater: return ">";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print(e, out);
    out += ')';
  } else {
    print(e, out);
  }
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case NodeKind::Constant: out += format_number(e.value()); return;
    case NodeKind::Variable: out += 'x' + std::to_string(e.index() + 1); return;
    case NodeKind::Parameter: out += e.name(); return;
    case NodeKind::Unary:
      if (e.unary_op() == UnaryOp::Neg) {
        out += '-';
        print_at(e.child(0), kPrecNeg, out);
      } else {
        out += unary_name(e.unary_op());
        out += '(';
        print(e.child(0), out);
        out += ')';
      }
      return;
    case NodeKind::Binary: {
      const int prec = precedence(e);
      print_at(e.child(0), prec, out);
      switch (e.binary_op()) {
        case BinaryOp::Add: out += " + "; break;
        case BinaryOp::Sub: out += " - "; break;
        case BinaryOp::Mul: out += '*'; break;
        case BinaryOp::Div: out += '/'; break;
      }
      print_at(e.child(1), prec + 1, out);
      return;
    }
    case NodeKind::Power:
      print_at(e.child(0), kPrecAtom, out);
      out += '^';
      if (e.value() < 0.0)
        out += '(' + format_number(e.value()) + ')';
      else
        out += format_number(e.value());
      return;
    case NodeKind::Conditional:
      out += "if(";
      print(e.child(0), out);
      out += ' ';
      out += relation_name(e.relation());
      out += ' ';
      print(e.child(1), out);
      out += ", ";
      print(e.child(2), out);
      out += ", ";
      print(e.child(3), out);
      out += ')';
      return;
  }
}

template <class Fn>
void visit(const Expr& e, Fn&& fn) {
  fn(e);
  for (const Expr& c : e.children()) visit(c, fn);
}

}  // namespace

double eval_expr(const Expr& e, std::span<const double> x, const ParamEnv& env,
                 const EvalOptions& opts) {
  return Evaluator{x, env, opts}(e);
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Constant: return a.value() == b.value();
    case NodeKind::Variable: return a.index() == b.index();
    case NodeKind::Parameter: return a.name() == b.name();
    case NodeKind::Unary:
      if (a.unary_op() != b.unary_op()) return false;
      break;
    case NodeKind::Binary:
      if (a.binary_op() != b.binary_op()) return false;
      break;
    case NodeKind::Power:
      if (a.value() != b.value()) return false;
      break;
    case NodeKind::Conditional:
      if (a.relation() != b.relation()) return false;
      break;
  }
  const auto ca = a.children();
  const auto cb = b.children();
  return std::equal(ca.begin(), ca.end(), cb.begin(), cb.end(), structurally_equal);
}

ParamSet parameters_of(const Expr& e) {
  ParamSet names;
  visit(e, [&](const Expr& node) {
    if (node.kind() == NodeKind::Parameter) names.insert(node.name());
  });
  return names;
}

std::size_t variable_bound(const Expr& e) {
  std::size_t bound = 0;
  visit(e, [&](const Expr& node) {
    if (node.kind() == NodeKind::Variable) bound = std::max(bound, node.index() + 1);
  });
  return bound;
}

bool has_conditional(const Expr& e) {
  bool found = false;
  visit(e, [&](const Expr& node) { found = found || node.kind() == NodeKind::Conditional; });
  return found;
}

std::vector<Expr> seam_functions(const Expr& e) {
  std::vector<Expr> seams;
  visit(e, [&](const Expr& node) {
    if (node.kind() != NodeKind::Conditional) return;
    Expr gap = sub(node.child(0), node.child(1));
    const bool seen = std::any_of(seams.begin(), seams.end(),
                                  [&](const Expr& s) { return structurally_equal(s, gap); });
    if (!seen) seams.push_back(std::move(gap));
  });
  return seams;
}

double seam_gap(const Expr& e, std::span<const double> x, const ParamEnv& env) {
  double gap = std::numeric_limits<double>::infinity();
  visit(e, [&](const Expr& node) {
    if (node.kind() != NodeKind::Conditional) return;
    try {
      const double lhs = eval_expr(node.child(0), x, env);
      const double rhs = eval_expr(node.child(1), x, env);
      gap = std::min(gap, std::abs(lhs - rhs));
    } catch (const DomainError&) {
    }
  });
  return gap;
}

}  // namespace obswin
