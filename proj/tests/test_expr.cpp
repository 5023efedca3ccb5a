#include <doctest.h>

#include <array>
#include <cmath>

#include "psiest/catalog.hpp"
#include "psiest/errors.hpp"
#include "psiest/expr.hpp"
#include "psiest/random.hpp"

using namespace psiest;

namespace {

double eval(std::string_view src, std::map<std::string, double> b = {}) {
  return evaluate(parse_expression(src), b);
}

ExprNodePtr node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

ExprNodePtr random_tree(Rng& rng, int depth) {
  const int pick = depth <= 0 ? rng.integer(0, 1) : rng.integer(0, 5);
  switch (pick) {
    case 0: return node({ConstantNode{rng.integer(0, 3) == 0 ? static_cast<double>(rng.integer(0, 9)) : rng.uniform(0, 100)}});
    case 1: {
      static const std::array<const char*, 3> names{"x", "t", "t2"};
      return node({VariableNode{names[static_cast<std::size_t>(rng.integer(0, 2))]}});
    }
    case 2: return node({NegateNode{random_tree(rng, depth - 1)}});
    case 3:
    case 4: {
      const auto op = static_cast<BinaryOp>(rng.integer(0, 4));
      return node({BinaryNode{op, random_tree(rng, depth - 1), random_tree(rng, depth - 1)}});
    }
    default: {
      const auto fn = static_cast<Function>(rng.integer(0, 6));
      std::vector<ExprNodePtr> args;
      for (int i = 0; i < function_arity(fn); ++i) args.push_back(random_tree(rng, depth - 1));
      return node({CallNode{fn, std::move(args)}});
    }
  }
}

}  // namespace

TEST_CASE("parse shapes and free variables") {
  const auto e = parse_expression("(x - t)/1.0");
  CHECK(e.free_variables() == std::set<std::string>{"t", "x"});
  CHECK(parse_expression("3").free_variables().empty());
  CHECK(parse_expression("sign(x - t)").uses(Function::Sign));
  CHECK_FALSE(parse_expression("x - t").uses(Function::Sign));
}

TEST_CASE("evaluation examples") {
  const double x = std::sqrt(1 - std::exp(-1.0));
  CHECK(eval("1/t + ln(1 - x^2)", {{"x", x}, {"t", 2}}) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(eval("x - t", {{"x", 3}, {"t", 1}}) == 2);
  CHECK(eval("sqrt(x) - sqrt(t)", {{"x", 64}, {"t", 100.0 / 9}}) == doctest::Approx(14.0 / 3).epsilon(1e-15));
  CHECK_THROWS_AS(eval("ln(1 - x^2)", {{"x", 1}}), EvalDomainError);
}

TEST_CASE("precedence and associativity") {
  CHECK(eval("-2^2") == -4);
  CHECK(eval("2^3^2") == 512);
  CHECK(eval("2^-1") == 0.5);
  CHECK(eval("2*3+4") == 10);
  CHECK(eval("2+3*4") == 14);
  CHECK(eval("2-3-4") == -5);
  CHECK(eval("8/4/2") == 1);
  CHECK(eval("--3") == 3);
  CHECK(eval("(1+2)*3") == 9);
  CHECK(eval("1.5e2 + .5") == 150.5);
  CHECK(eval("2E-1") == doctest::Approx(0.2));
}

TEST_CASE("functions") {
  CHECK(eval("sign(0)") == 0);
  CHECK(eval("sign(-3)") == -1);
  CHECK(eval("sign(2)") == 1);
  CHECK(eval("min(2, -1)") == -1);
  CHECK(eval("max(2, -1)") == 2);
  CHECK(eval("abs(-2.5)") == 2.5);
  CHECK(eval("exp(0)") == 1);
  CHECK(eval("ln(1)") == 0);
  CHECK(eval("(-8)^3") == -512);
  CHECK(eval("0^0") == 1);
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_expression("ln(");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse_expression(""), SyntaxError);
  CHECK_THROWS_AS(parse_expression("1 +"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("(1"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("1 2"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("x $ t"), SyntaxError);
  try {
    parse_expression("x + )");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
  }
}

TEST_CASE("identifier and arity errors") {
  CHECK_THROWS_AS(parse_expression("foo(x)"), UnknownIdentifier);
  const std::array<std::string, 2> declared{"x", "t"};
  CHECK_THROWS_AS(parse_expression("x + y", declared), UnknownIdentifier);
  CHECK_NOTHROW(parse_expression("x + t", declared));
  CHECK_THROWS_AS(parse_expression("min(x)"), ArityError);
  CHECK_THROWS_AS(parse_expression("sqrt(x, t)"), ArityError);
  CHECK_THROWS_AS(eval("x + t", {{"x", 1}}), MissingBinding);
}

TEST_CASE("evaluation domain errors are never silent") {
  CHECK_THROWS_AS(eval("ln(0)"), EvalDomainError);
  CHECK_THROWS_AS(eval("ln(-1)"), EvalDomainError);
  CHECK_THROWS_AS(eval("sqrt(-1)"), EvalDomainError);
  CHECK_THROWS_AS(eval("1/0"), EvalDomainError);
  CHECK_THROWS_AS(eval("0^-1"), EvalDomainError);
  CHECK_THROWS_AS(eval("(-8)^(1/3)"), EvalDomainError);
  CHECK_THROWS_AS(eval("exp(1000)"), EvalDomainError);
  try {
    eval("sqrt(x - 3)", {{"x", 1}});
    FAIL("expected EvalDomainError");
  } catch (const EvalDomainError& e) {
    CHECK(e.argument() == -2);
    CHECK(e.node().find("sqrt") != std::string::npos);
  }
}

TEST_CASE("print/parse round trip on random trees") {
  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const Expression e(random_tree(rng, rng.integer(0, 6)));
    const std::string text = print(e);
    const auto back = parse_expression(text);
    CHECK_MESSAGE(structurally_equal(e, back), text);
    CHECK(print(back) == text);
  }
}

TEST_CASE("bound program agrees with tree evaluation") {
  Rng rng(99);
  int compared = 0;
  for (int i = 0; i < 2000; ++i) {
    const Expression e(random_tree(rng, rng.integer(0, 6)));
    const auto bound = e.bind({"x", "t", "t2"});
    const std::array<double, 3> args{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 5)};
    double tree = 0;
    bool tree_ok = true;
    try {
      tree = evaluate(e, {{"x", args[0]}, {"t", args[1]}, {"t2", args[2]}});
    } catch (const EvalDomainError&) {
      tree_ok = false;
    }
    if (tree_ok) {
      CHECK(bound(args) == tree);
      ++compared;
    } else {
      CHECK_THROWS_AS(bound(args), EvalDomainError);
    }
  }
  CHECK(compared > 500);
}

TEST_CASE("expression psi matches native normal location") {
  const double sigma = 1.7;
  const auto native = make_psi(normal_location(sigma));
  const auto text = "(x - t)/" + std::to_string(sigma) + "^2";
  const auto user = make_psi(user_expression(text, ParameterDomain::real_line(), Interval::real_line()));
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-100, 100);
    const double t = rng.uniform(-100, 100);
    const double a = native(x, t);
    const double b = user(x, t);
    CHECK(std::fabs(a - b) <= 1e-15 * std::max(1.0, std::fabs(a)));
  }
}
