#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace branchpde::expr {

enum class Function {
  Exp,
  Log,
  Sqrt,
  Cos,
  Sin,
  Abs,
  Step,     // 1 if x >= 0 else 0
  Pospart,  // max(x, 0)
  Min,
  Max,
  Pow,
  Norm2,         // |x|^2, no arguments
  PsiGetoor,     // psi_getoor(k, alpha) at x
  PhiBump,       // phi_bump(k, alpha) at x
  IndicatorBox,  // 1 if lo <= x_j <= hi for every j
};

/// Name as written in source, e.g. "psi_getoor".
std::string_view function_name(Function f);

/// Expression tree. Constants are non-negative; a leading minus is a Negate node.
struct Node {
  enum class Kind { Constant, Time, Coordinate, Negate, Add, Subtract, Multiply, Divide, Power, Call };

  Kind kind = Kind::Constant;
  double value = 0.0;  // Constant
  int index = 0;       // Coordinate, 1-based
  Function function = Function::Exp;
  std::vector<Node> args;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Parses src with variables t and x1..xd.
///
/// Throws SyntaxError (byte offset and expected tokens), UnknownIdentifierError,
/// or DimensionError for xj with j > d.
Node parse_expression(std::string_view src, int d);

/// Fully parenthesized source text; parse_expression(to_string(n), d) == n.
std::string to_string(const Node& node);

/// A parsed expression compiled to a flat postfix program.
class Expression {
 public:
  Expression(Node ast, int d);

  static Expression parse(std::string_view src, int d) { return Expression(parse_expression(src, d), d); }

  /// Throws DimensionError if x.size() != d, EvaluationError on division by
  /// zero, a negative base with a non-integer exponent, or log/sqrt out of domain.
  double operator()(double t, std::span<const double> x) const;

  const Node& ast() const noexcept { return ast_; }
  int dimension() const noexcept { return d_; }
  std::string to_string() const { return expr::to_string(ast_); }

  /// True if the value does not depend on t, resp. x.
  bool time_independent() const noexcept { return !uses_time_; }
  bool space_independent() const noexcept { return !uses_space_; }

  struct Instruction;
  struct Program;

 private:
  Node ast_;
  int d_;
  bool uses_time_ = false;
  bool uses_space_ = false;
  std::shared_ptr<const Program> program_;
};

double eval_expression(const Expression& e, double t, std::span<const double> x);

}  // namespace branchpde::expr
