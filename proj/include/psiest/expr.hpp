#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace psiest {

// Scalar expressions over real variables, used for user-supplied ψ(x, t),
// quasi-arithmetic generators f(x) and composite maps g(t1, ..., tN).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//   number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits] | '.' digits ...
//
// Functions: ln exp sqrt abs sign (one argument), min max (two arguments).
// See docs/expression-grammar.md.

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Ln, Exp, Sqrt, Abs, Sign, Min, Max };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ConstantNode {
  double value;
};
struct VariableNode {
  std::string name;
};
struct NegateNode {
  ExprNodePtr operand;
};
struct BinaryNode {
  BinaryOp op;
  ExprNodePtr lhs;
  ExprNodePtr rhs;
};
struct CallNode {
  Function fn;
  std::vector<ExprNodePtr> args;
};

struct ExprNode {
  std::variant<ConstantNode, VariableNode, NegateNode, BinaryNode, CallNode> data;
};

std::string_view function_name(Function fn) noexcept;
int function_arity(Function fn) noexcept;

class BoundExpression;

/// Immutable expression tree plus its free-variable set. Cheap to copy.
class Expression {
 public:
  explicit Expression(ExprNodePtr root);

  const ExprNode& root() const noexcept { return *root_; }
  ExprNodePtr root_ptr() const noexcept { return root_; }
  const std::set<std::string>& free_variables() const noexcept { return free_; }

  /// True if any call node applies fn.
  bool uses(Function fn) const;

  /// Compiles for repeated evaluation with positional arguments; `order`
  /// names the variable each position binds. Throws MissingBinding when a
  /// free variable is not listed.
  BoundExpression bind(std::vector<std::string> order) const;

 private:
  ExprNodePtr root_;
  std::set<std::string> free_;
};

/// Parses src. Unknown function names raise UnknownIdentifier; any variable
/// name is accepted.
Expression parse_expression(std::string_view src);

/// Parses src, additionally rejecting variables outside `declared` with
/// UnknownIdentifier.
Expression parse_expression(std::string_view src, std::span<const std::string> declared);

/// Exact recursive evaluation. Throws MissingBinding for an unbound free
/// variable and EvalDomainError for ln/sqrt/division/power outside their
/// domains or any non-finite intermediate.
double evaluate(const Expression& e, const std::map<std::string, double>& bindings);

/// Fully parenthesized text that parses back to a structurally equal tree.
std::string print(const Expression& e);

bool structurally_equal(const Expression& a, const Expression& b);

/// Flat postfix program for hot evaluation loops (ψ inside the solver).
/// Same results and domain errors as evaluate().
class BoundExpression {
 public:
  double operator()(std::span<const double> args) const;
  std::size_t arity() const noexcept { return arity_; }

 private:
  friend class Expression;
  enum class OpCode { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Ln, Exp, Sqrt, Abs, Sign, Min, Max };
  struct Instr {
    OpCode code;
    double value;      // Const
    std::size_t slot;  // Var
    std::size_t text;  // index into texts_ for error messages
  };
  std::vector<Instr> program_;
  std::vector<std::string> texts_;
  std::size_t arity_ = 0;
  std::size_t max_stack_ = 0;
};

}  // namespace psiest
