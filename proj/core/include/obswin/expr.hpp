#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace obswin {

/// Named parameter values (e.g. the threshold M of a piecewise output).
using ParamEnv = std::map<std::string, double, std::less<>>;
using ParamSet = std::set<std::string, std::less<>>;

enum class NodeKind { Constant, Variable, Parameter, Unary, Binary, Power, Conditional };
enum class UnaryOp { Neg, Exp, Log, Sin, Cos, Tanh, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div };
enum class Relation { Less, LessEqual, Greater, GreaterEqual };

/// Immutable expression tree over state variables and named parameters.
///
/// Nodes are shared, so copying an Expr is cheap and sub-trees may be reused
/// freely across expressions and threads. State variables are addressed by a
/// 0-based index; the text form spells them x1..xn.
class Expr {
 public:
  /// The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr variable(std::size_t index);
  static Expr parameter(std::string name);
  /// Raw node constructors. These do not simplify; use the free functions
  /// below (or operators) for simplifying construction.
  static Expr make_unary(UnaryOp op, Expr arg);
  static Expr make_binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr make_power(Expr base, double exponent);
  static Expr make_conditional(Expr lhs, Relation rel, Expr rhs, Expr then_branch,
                               Expr else_branch);

  NodeKind kind() const noexcept { return node_->kind; }
  /// Constant value (Constant) or exponent (Power).
  double value() const noexcept { return node_->value; }
  std::size_t index() const noexcept { return node_->index; }
  const std::string& name() const noexcept { return node_->name; }
  UnaryOp unary_op() const noexcept { return node_->unary; }
  BinaryOp binary_op() const noexcept { return node_->binary; }
  Relation relation() const noexcept { return node_->relation; }

  /// Children in a fixed order: Unary {arg}; Binary {lhs, rhs}; Power {base};
  /// Conditional {lhs, rhs, then, else}.
  std::span<const Expr> children() const noexcept { return node_->children; }
  const Expr& child(std::size_t i) const { return node_->children.at(i); }

  bool is_constant() const noexcept { return kind() == NodeKind::Constant; }
  bool is_constant(double v) const noexcept { return is_constant() && value() == v; }

 private:
  struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;
    std::size_t index = 0;
    std::string name;
    UnaryOp unary = UnaryOp::Neg;
    BinaryOp binary = BinaryOp::Add;
    Relation relation = Relation::Less;
    std::vector<Expr> children;
  };

  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

// Simplifying constructors: constant folding and 0/1 identities are applied
// locally at construction time.
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr neg(Expr a);
Expr pow(Expr base, double exponent);
Expr apply(UnaryOp op, Expr arg);
Expr conditional(Expr lhs, Relation rel, Expr rhs, Expr then_branch, Expr else_branch);

inline Expr operator+(Expr a, Expr b) { return add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return mul(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return div(std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return neg(std::move(a)); }

/// How a conditional node picks its branch when the predicate sides lie
/// within EvalOptions::seam_margin of each other.
enum class SeamBranch { Natural, Then, Else };

struct EvalOptions {
  double seam_margin = 0.0;
  SeamBranch seam_branch = SeamBranch::Natural;
};

/// Parses `text` under the expression grammar. Identifiers x1..xn are state
/// variables, every other identifier must be in `params`.
/// Throws ParseError.
Expr parse_expr(std::string_view text, std::size_t n, const ParamSet& params);

/// Evaluates at state `x`. Throws DomainError on division by zero, log of a
/// nonpositive value, sqrt of a negative value or a negative base raised to a
/// non-integer power; throws PreconditionError on a missing parameter or an
/// out-of-range variable.
double eval_expr(const Expr& e, std::span<const double> x, const ParamEnv& env,
                 const EvalOptions& opts = {});

/// Exact partial derivative with respect to state variable `index` (0-based).
/// Conditionals are differentiated branch-wise.
Expr differentiate(const Expr& e, std::size_t index);

/// Rebuilds `e` bottom-up through the simplifying constructors.
Expr simplify(const Expr& e);

/// Parseable text form; constants are printed with 17 significant digits.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

/// Names of all parameters referenced by `e`.
ParamSet parameters_of(const Expr& e);

/// One past the largest variable index referenced by `e` (0 if none).
std::size_t variable_bound(const Expr& e);

bool has_conditional(const Expr& e);

/// For every conditional node, the difference lhs - rhs of its predicate.
/// The predicate boundary is the zero set of these expressions.
std::vector<Expr> seam_functions(const Expr& e);

/// Smallest |lhs - rhs| over every conditional predicate in `e` at `x`;
/// +inf when `e` has no conditional. Predicates that cannot be evaluated at
/// `x` are skipped.
double seam_gap(const Expr& e, std::span<const double> x, const ParamEnv& env);

}  // namespace obswin
