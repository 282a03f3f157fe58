#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "geoforms/expr.hpp"

using namespace geoforms;

namespace {

// Random expression over {x, y} built from domain-safe pieces, so every
// generated tree can be evaluated and differentiated anywhere.
Expression random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
  std::uniform_real_distribution<double> cst(0.3, 2.0);
  switch (pick(rng)) {
    case 0: return Expression::variable("x");
    case 1: return Expression::variable("y");
    case 2: return Expression(cst(rng));
    case 3: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 6: return sin(random_expr(rng, depth - 1));
    case 7: return cos(random_expr(rng, depth - 1));
    case 8: return tanh(random_expr(rng, depth - 1));
    default: {
      Expression u = random_expr(rng, depth - 1);
      return random_expr(rng, depth - 1) / (Expression(2.0) + u * u);
    }
  }
}

double central_diff(const Expression& e, const std::string& var,
                    std::map<std::string, double> p, double h) {
  auto q = p;
  q[var] = p[var] + h;
  double hi = e.evaluate(q);
  q[var] = p[var] - h;
  double lo = e.evaluate(q);
  return (hi - lo) / (2.0 * h);
}

}  // namespace

TEST_CASE("evaluation of the spec examples") {
  CHECK(parse_expression("exp(2*t)").evaluate({{"t", 0.0}}) == doctest::Approx(1.0));
  CHECK(parse_expression("sin(x)").evaluate({{"x", std::acos(-1.0) / 2}}) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_expression("3/(1+t)").evaluate({{"t", -1.0}}), EvalError);
}

TEST_CASE("domain errors name the offending subexpression") {
  try {
    parse_expression("1 + log(x)").evaluate({{"x", -2.0}});
    FAIL("expected EvalError");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("sqrt(x)").evaluate({{"x", -1.0}}), EvalError);
}

TEST_CASE("parse errors carry a byte offset") {
  CHECK_THROWS_AS(parse_expression("1 + * 2"), ParseError);
  try {
    parse_expression("sin(x");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset <= 5);
  }
  CHECK_THROWS_AS(parse_expression(""), ParseError);
  CHECK_THROWS_AS(parse_expression("x y"), ParseError);
}

TEST_CASE("grammar shape: precedence and right-associative power") {
  CHECK(parse_expression("2+3*4").evaluate({}) == doctest::Approx(14.0));
  CHECK(parse_expression("2^3^2").evaluate({}) == doctest::Approx(512.0));
  CHECK(parse_expression("-2^2").evaluate({}) == doctest::Approx(4.0));
  CHECK(parse_expression("8/4/2").evaluate({}) == doctest::Approx(1.0));
}

TEST_CASE("round-trip: parse(print(e)) is structurally equal to e") {
  std::mt19937 rng(12345);
  for (int i = 0; i < 200; ++i) {
    Expression e = random_expr(rng, 4);
    Expression back = parse_expression(e.str());
    CHECK(back.same_structure(e));
  }
}

TEST_CASE("finite-difference consistency of derivative") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Expression e = random_expr(rng, 4);
    std::map<std::string, double> p{{"x", coord(rng)}, {"y", coord(rng)}};
    for (const char* v : {"x", "y"}) {
      double sym = e.derivative(v).evaluate(p);
      double fd = central_diff(e, v, p, 1e-5);
      CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
    }
  }
}

TEST_CASE("linearity over Add and Leibniz over Mul") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Expression a = random_expr(rng, 3);
    Expression b = random_expr(rng, 3);
    std::map<std::string, double> p{{"x", coord(rng)}, {"y", coord(rng)}};
    double da = a.derivative("x").evaluate(p);
    double db = b.derivative("x").evaluate(p);
    CHECK((a + b).derivative("x").evaluate(p) == doctest::Approx(da + db));
    CHECK((a * b).derivative("x").evaluate(p) ==
          doctest::Approx(da * b.evaluate(p) + a.evaluate(p) * db));
  }
}

TEST_CASE("power domain rules") {
  Expression x = Expression::variable("x");
  // literal integer exponent is fine for negative bases
  CHECK(pow(x, 3.0).evaluate({{"x", -2.0}}) == doctest::Approx(-8.0));
  // literal non-integer exponent on a negative base is a domain error
  CHECK_THROWS_AS(pow(x, 0.5).evaluate({{"x", -2.0}}), EvalError);
  // symbolic exponent goes through exp(b log a): base must be positive
  Expression y = Expression::variable("y");
  CHECK(pow(x, y).evaluate({{"x", 2.0}, {"y", 3.0}}) == doctest::Approx(8.0));
  CHECK_THROWS_AS(pow(x, y).evaluate({{"x", -2.0}, {"y", 3.0}}), EvalError);
  // d/dx x^c = c x^(c-1)
  CHECK(pow(x, 4.0).derivative("x").evaluate({{"x", 2.0}}) == doctest::Approx(32.0));
}

TEST_CASE("literal 0/1 folding keeps trivial trees flat") {
  Expression x = Expression::variable("x");
  CHECK((x * Expression(1.0)).same_structure(x));
  CHECK((x + Expression(0.0)).same_structure(x));
  CHECK((x * Expression(0.0)).is_constant(0.0));
  CHECK((Expression(2.0) + Expression(3.0)).is_constant(5.0));
}

TEST_CASE("substitute replaces a variable") {
  Expression e = parse_expression("x^2 + sin(t)*x");
  Expression s = substitute(e, "t", Expression(0.0));
  CHECK(s.evaluate({{"x", 3.0}}) == doctest::Approx(9.0));
  CHECK_FALSE(s.depends_on("t"));
  CHECK(e.depends_on("t"));
}

TEST_CASE("node budget guard") {
  std::size_t old_budget = expr_node_budget();
  std::size_t baseline = ExprNode::live_count();
  set_expr_node_budget(baseline + 50);
  auto build_big = [] {
    Expression e = Expression::variable("x");
    for (int i = 0; i < 200; ++i) e = sin(e) + cos(e);
    return e;
  };
  CHECK_THROWS_AS(build_big(), BudgetError);
  set_expr_node_budget(old_budget);
  CHECK_NOTHROW(build_big());
}

TEST_CASE("evaluator cache matches plain evaluation") {
  Expression e = parse_expression("sin(x)*cos(y) + exp(x*y)");
  std::map<std::string, double> p{{"x", 0.4}, {"y", -0.7}};
  Evaluator ev(p);
  CHECK(ev(e) == doctest::Approx(e.evaluate(p)));
  CHECK(ev(e) == doctest::Approx(e.evaluate(p)));  // cached path
  CHECK_THROWS_AS(ev(Expression::variable("unbound")), EvalError);
}
