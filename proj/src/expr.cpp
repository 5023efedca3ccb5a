#include "psiest/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "psiest/errors.hpp"
#include "psiest/interval.hpp"

namespace psiest {

namespace {

struct FunctionInfo {
  std::string_view name;
  Function fn;
  int arity;
};

constexpr std::array<FunctionInfo, 7> kFunctions{{
    {"ln", Function::Ln, 1},
    {"exp", Function::Exp, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},
    {"sign", Function::Sign, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

ExprNodePtr make(auto&& data) {
  return std::make_shared<const ExprNode>(ExprNode{std::forward<decltype(data)>(data)});
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, const std::span<const std::string>* declared)
      : src_(src), declared_(declared) {}

  ExprNodePtr parse() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  ExprNodePtr parse_expr() {
    auto lhs = parse_term();
    while (true) {
      if (accept('+')) {
        lhs = make(BinaryNode{BinaryOp::Add, lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make(BinaryNode{BinaryOp::Sub, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_term() {
    auto lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = make(BinaryNode{BinaryOp::Mul, lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make(BinaryNode{BinaryOp::Div, lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr parse_unary() {
    if (accept('-')) return make(NegateNode{parse_unary()});
    return parse_power();
  }

  ExprNodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make(BinaryNode{BinaryOp::Pow, base, parse_unary()});
    return base;
  }

  ExprNodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected an operand but input ended");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  ExprNodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) fail("malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      pos_ = start;
      fail("numeric literal out of range");
    }
    return make(ConstantNode{v});
  }

  ExprNodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    const bool is_call = pos_ < src_.size() && src_[pos_] == '(';
    if (is_call) {
      const FunctionInfo* info = find_function(name);
      if (info == nullptr) throw UnknownIdentifier(name, start);
      ++pos_;
      std::vector<ExprNodePtr> args;
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
      expect(')');
      if (static_cast<int>(args.size()) != info->arity) {
        throw ArityError(name + " takes " + std::to_string(info->arity) + " argument(s), got " +
                         std::to_string(args.size()) + " at offset " + std::to_string(start));
      }
      return make(CallNode{info->fn, std::move(args)});
    }
    if (find_function(name) != nullptr) {
      pos_ = start + name.size();
      fail("function '" + name + "' used without arguments");
    }
    if (declared_ != nullptr &&
        std::find((*declared_).begin(), (*declared_).end(), name) == (*declared_).end()) {
      throw UnknownIdentifier(name, start);
    }
    return make(VariableNode{std::move(name)});
  }

  std::string_view src_;
  const std::span<const std::string>* declared_;
  std::size_t pos_ = 0;
};

void collect_variables(const ExprNode& n, std::set<std::string>& out) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, VariableNode>) {
          out.insert(d.name);
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          collect_variables(*d.operand, out);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          collect_variables(*d.lhs, out);
          collect_variables(*d.rhs, out);
        } else if constexpr (std::is_same_v<T, CallNode>) {
          for (const auto& a : d.args) collect_variables(*a, out);
        }
      },
      n.data);
}

// ---------------------------------------------------------------------------
// Printing

char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

std::string print_node(const ExprNode& n) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return format_real(d.value);
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return d.name;
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          return "(-" + print_node(*d.operand) + ")";
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return "(" + print_node(*d.lhs) + " " + op_char(d.op) + " " + print_node(*d.rhs) + ")";
        } else {
          std::string s(function_name(d.fn));
          s += "(";
          for (std::size_t i = 0; i < d.args.size(); ++i) {
            if (i) s += ", ";
            s += print_node(*d.args[i]);
          }
          return s + ")";
        }
      },
      n.data);
}

// ---------------------------------------------------------------------------
// Shared arithmetic with domain checks

// `node` is only invoked to name the offending subexpression on failure.
template <typename NodeText>
double checked(double v, const NodeText& node) {
  if (!std::isfinite(v)) throw EvalDomainError(node(), v, "non-finite result");
  return v;
}

template <typename NodeText>
double apply_binary(BinaryOp op, double a, double b, const NodeText& node) {
  switch (op) {
    case BinaryOp::Add: return checked(a + b, node);
    case BinaryOp::Sub: return checked(a - b, node);
    case BinaryOp::Mul: return checked(a * b, node);
    case BinaryOp::Div:
      if (b == 0.0) throw EvalDomainError(node(), b, "division by zero");
      return checked(a / b, node);
    case BinaryOp::Pow:
      if (a == 0.0 && b < 0) throw EvalDomainError(node(), b, "zero raised to a negative power");
      if (a < 0 && std::trunc(b) != b) {
        throw EvalDomainError(node(), a, "negative base with non-integer exponent");
      }
      return checked(std::pow(a, b), node);
  }
  return 0.0;
}

double sign_of(double a) { return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0); }

template <typename NodeText>
double apply_unary(Function fn, double a, const NodeText& node) {
  switch (fn) {
    case Function::Ln:
      if (!(a > 0)) throw EvalDomainError(node(), a, "logarithm of a nonpositive number");
      return checked(std::log(a), node);
    case Function::Exp: return checked(std::exp(a), node);
    case Function::Sqrt:
      if (a < 0) throw EvalDomainError(node(), a, "square root of a negative number");
      return std::sqrt(a);
    case Function::Abs: return std::fabs(a);
    case Function::Sign: return sign_of(a);
    default: break;
  }
  return 0.0;
}

double eval_node(const ExprNode& n, const std::map<std::string, double>& bindings) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          auto it = bindings.find(d.name);
          if (it == bindings.end()) throw MissingBinding(d.name);
          return it->second;
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          return -eval_node(*d.operand, bindings);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          const double a = eval_node(*d.lhs, bindings);
          const double b = eval_node(*d.rhs, bindings);
          return apply_binary(d.op, a, b, [&] { return print_node(n); });
        } else {
          if (d.fn == Function::Min || d.fn == Function::Max) {
            const double a = eval_node(*d.args[0], bindings);
            const double b = eval_node(*d.args[1], bindings);
            return d.fn == Function::Min ? std::min(a, b) : std::max(a, b);
          }
          const double a = eval_node(*d.args[0], bindings);
          return apply_unary(d.fn, a, [&] { return print_node(n); });
        }
      },
      n.data);
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&](const auto& da) -> bool {
        using T = std::decay_t<decltype(da)>;
        const auto& db = std::get<T>(b.data);
        if constexpr (std::is_same_v<T, ConstantNode>) {
          return da.value == db.value;
        } else if constexpr (std::is_same_v<T, VariableNode>) {
          return da.name == db.name;
        } else if constexpr (std::is_same_v<T, NegateNode>) {
          return nodes_equal(*da.operand, *db.operand);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return da.op == db.op && nodes_equal(*da.lhs, *db.lhs) && nodes_equal(*da.rhs, *db.rhs);
        } else {
          if (da.fn != db.fn || da.args.size() != db.args.size()) return false;
          for (std::size_t i = 0; i < da.args.size(); ++i) {
            if (!nodes_equal(*da.args[i], *db.args[i])) return false;
          }
          return true;
        }
      },
      a.data);
}

bool node_uses(const ExprNode& n, Function fn) {
  return std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NegateNode>) {
          return node_uses(*d.operand, fn);
        } else if constexpr (std::is_same_v<T, BinaryNode>) {
          return node_uses(*d.lhs, fn) || node_uses(*d.rhs, fn);
        } else if constexpr (std::is_same_v<T, CallNode>) {
          if (d.fn == fn) return true;
          return std::any_of(d.args.begin(), d.args.end(),
                             [&](const auto& a) { return node_uses(*a, fn); });
        } else {
          return false;
        }
      },
      n.data);
}

}  // namespace

std::string_view function_name(Function fn) noexcept {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

int function_arity(Function fn) noexcept {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.arity;
  }
  return 0;
}

Expression::Expression(ExprNodePtr root) : root_(std::move(root)) {
  collect_variables(*root_, free_);
}

bool Expression::uses(Function fn) const { return node_uses(*root_, fn); }

Expression parse_expression(std::string_view src) {
  return Expression(Parser(src, nullptr).parse());
}

Expression parse_expression(std::string_view src, std::span<const std::string> declared) {
  return Expression(Parser(src, &declared).parse());
}

double evaluate(const Expression& e, const std::map<std::string, double>& bindings) {
  return eval_node(e.root(), bindings);
}

std::string print(const Expression& e) { return print_node(e.root()); }

bool structurally_equal(const Expression& a, const Expression& b) {
  return nodes_equal(a.root(), b.root());
}

// ---------------------------------------------------------------------------
// Compilation to a postfix program

namespace {

struct Compiler {
  std::vector<std::string> order;
  std::vector<std::string> texts;
  std::size_t depth = 0;
  std::size_t max_depth = 0;

  template <typename Instr, typename OpCode>
  void emit(std::vector<Instr>& prog, OpCode code, double value, std::size_t slot,
            const ExprNode& n, int stack_delta) {
    texts.push_back(print_node(n));
    prog.push_back(Instr{code, value, slot, texts.size() - 1});
    depth = static_cast<std::size_t>(static_cast<long>(depth) + stack_delta);
    max_depth = std::max(max_depth, depth);
  }
};

}  // namespace

BoundExpression Expression::bind(std::vector<std::string> order) const {
  for (const auto& v : free_) {
    if (std::find(order.begin(), order.end(), v) == order.end()) throw MissingBinding(v);
  }
  BoundExpression out;
  using OpCode = BoundExpression::OpCode;
  Compiler c;
  c.order = std::move(order);

  auto rec = [&](auto&& self, const ExprNode& n) -> void {
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantNode>) {
            c.emit(out.program_, OpCode::Const, d.value, 0, n, +1);
          } else if constexpr (std::is_same_v<T, VariableNode>) {
            const auto slot = static_cast<std::size_t>(
                std::find(c.order.begin(), c.order.end(), d.name) - c.order.begin());
            c.emit(out.program_, OpCode::Var, 0.0, slot, n, +1);
          } else if constexpr (std::is_same_v<T, NegateNode>) {
            self(self, *d.operand);
            c.emit(out.program_, OpCode::Neg, 0.0, 0, n, 0);
          } else if constexpr (std::is_same_v<T, BinaryNode>) {
            self(self, *d.lhs);
            self(self, *d.rhs);
            OpCode code = OpCode::Add;
            switch (d.op) {
              case BinaryOp::Add: code = OpCode::Add; break;
              case BinaryOp::Sub: code = OpCode::Sub; break;
              case BinaryOp::Mul: code = OpCode::Mul; break;
              case BinaryOp::Div: code = OpCode::Div; break;
              case BinaryOp::Pow: code = OpCode::Pow; break;
            }
            c.emit(out.program_, code, 0.0, 0, n, -1);
          } else {
            for (const auto& a : d.args) self(self, *a);
            OpCode code = OpCode::Ln;
            switch (d.fn) {
              case Function::Ln: code = OpCode::Ln; break;
              case Function::Exp: code = OpCode::Exp; break;
              case Function::Sqrt: code = OpCode::Sqrt; break;
              case Function::Abs: code = OpCode::Abs; break;
              case Function::Sign: code = OpCode::Sign; break;
              case Function::Min: code = OpCode::Min; break;
              case Function::Max: code = OpCode::Max; break;
            }
            c.emit(out.program_, code, 0.0, 0, n, 1 - static_cast<int>(d.args.size()));
          }
        },
        n.data);
  };
  rec(rec, *root_);
  out.texts_ = std::move(c.texts);
  out.arity_ = c.order.size();
  out.max_stack_ = c.max_depth;
  return out;
}

double BoundExpression::operator()(std::span<const double> args) const {
  if (args.size() < arity_) {
    throw MissingBinding("positional argument " + std::to_string(args.size()));
  }
  std::array<double, 32> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_stack_ > small.size()) {
    big.resize(max_stack_);
    stack = big.data();
  }
  std::size_t sp = 0;
  for (const auto& in : program_) {
    switch (in.code) {
      case OpCode::Const: stack[sp++] = in.value; break;
      case OpCode::Var: stack[sp++] = args[in.slot]; break;
      case OpCode::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case OpCode::Add:
      case OpCode::Sub:
      case OpCode::Mul:
      case OpCode::Div:
      case OpCode::Pow: {
        const double b = stack[--sp];
        const double a = stack[sp - 1];
        BinaryOp op = BinaryOp::Add;
        if (in.code == OpCode::Sub) op = BinaryOp::Sub;
        if (in.code == OpCode::Mul) op = BinaryOp::Mul;
        if (in.code == OpCode::Div) op = BinaryOp::Div;
        if (in.code == OpCode::Pow) op = BinaryOp::Pow;
        stack[sp - 1] = apply_binary(op, a, b, [&] { return texts_[in.text]; });
        break;
      }
      case OpCode::Min: {
        const double b = stack[--sp];
        stack[sp - 1] = std::min(stack[sp - 1], b);
        break;
      }
      case OpCode::Max: {
        const double b = stack[--sp];
        stack[sp - 1] = std::max(stack[sp - 1], b);
        break;
      }
      case OpCode::Ln: stack[sp - 1] = apply_unary(Function::Ln, stack[sp - 1], [&] { return texts_[in.text]; }); break;
      case OpCode::Exp: stack[sp - 1] = apply_unary(Function::Exp, stack[sp - 1], [&] { return texts_[in.text]; }); break;
      case OpCode::Sqrt: stack[sp - 1] = apply_unary(Function::Sqrt, stack[sp - 1], [&] { return texts_[in.text]; }); break;
      case OpCode::Abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
      case OpCode::Sign: stack[sp - 1] = sign_of(stack[sp - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace psiest
