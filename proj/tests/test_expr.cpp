#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "support.hpp"

using namespace optctl;
using testing_support::RandomExpr;

namespace {

Expr var(const char* n) { return Expr::variable(n); }
Expr num(double v) { return Expr::constant(v); }

}  // namespace

// ---- parsing ---------------------------------------------------------------

TEST(Parse, QuadraticCostTerm) {
  const Expr e = parse_expr("0.5*u^2");
  const Expr expected = Expr::raw_binary(BinaryOp::Mul, num(0.5), Expr::raw_binary(BinaryOp::Pow, var("u"), num(2)));
  EXPECT_EQ(e, expected);
}

TEST(Parse, AdditiveIdentityFolds) { EXPECT_EQ(parse_expr("x1 + 0"), var("x1")); }

TEST(Parse, SumOfFunctions) {
  const Expr expected = Expr::raw_binary(BinaryOp::Add, Expr::raw_unary(UnaryOp::Exp, var("x1")),
                                         Expr::raw_unary(UnaryOp::Cos, var("x2")));
  EXPECT_EQ(parse_expr("exp(x1) + cos(x2)"), expected);
}

TEST(Parse, ConstantSubtreesFold) {
  EXPECT_EQ(parse_expr("2*3"), num(6));
  EXPECT_EQ(parse_expr("x*(2+1)"), Expr::raw_binary(BinaryOp::Mul, var("x"), num(3)));
  EXPECT_EQ(parse_expr("sin(0)"), num(0));
}

TEST(Parse, WhitespaceInsensitive) { EXPECT_EQ(parse_expr("  a*b +   c "), parse_expr("a*b+c")); }

TEST(Parse, PowerIsRightAssociative) {
  const Expr e = parse_expr("x^2^3", {.fold = false});
  const auto* b = e.as_binary();
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->op, BinaryOp::Pow);
  EXPECT_EQ(b->lhs, var("x"));
  EXPECT_EQ(b->rhs, num(8));  // the exponent is always folded to a constant
}

TEST(Parse, PowerBindsTighterThanUnaryMinus) {
  Bindings b{{"x", 3.0}};
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("-x^2"), b), -9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("(-x)^2"), b), 9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("2^-1"), b), 0.5);
}

TEST(Parse, MulBeforeAdd) {
  Bindings b{{"a", 2.0}, {"b", 3.0}, {"c", 4.0}};
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("a + b*c"), b), 14.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("a - b - c"), b), -5.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("a / b / c"), b), 2.0 / 3.0 / 4.0);
}

TEST(Parse, ScientificNotationAndDottedNames) {
  EXPECT_EQ(parse_expr("1.5e-3"), num(1.5e-3));
  EXPECT_EQ(parse_expr("source.V"), var("source.V"));
  EXPECT_EQ(parse_expr("_a1"), var("_a1"));
}

TEST(Parse, UnknownFunctionIsAnError) {
  try {
    parse_expr("tan(x)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown function"), std::string::npos);
  }
}

TEST(Parse, SyntaxErrorsCarryPosition) {
  for (const char* bad : {"", "x +", "(x", "x)", "2 ** 3", "x y", "sin x", "1.2.3", "x^y", "@"}) {
    EXPECT_THROW(parse_expr(bad), ParseError) << bad;
  }
  try {
    parse_expr("x + * y");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

// ---- evaluation -------------------------------------------------------------

TEST(Evaluate, Examples) {
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("0.5*u^2"), {{"u", 2.0}}), 2.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("sin(x1) + x2"), {{"x1", 0.0}, {"x2", 0.0}}), 0.0);
  EXPECT_DOUBLE_EQ(evaluate(parse_expr("0.5*t^3 - 1.75*t^2 + t + 1"), {{"t", 1.0}}), 0.75);
}

TEST(Evaluate, UnboundVariableIsNamed) {
  try {
    evaluate(parse_expr("x + y"), {{"x", 1.0}});
    FAIL();
  } catch (const UnboundVariable& e) {
    EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
  }
}

TEST(Evaluate, DomainErrorsBecomeNonFinite) {
  EXPECT_TRUE(std::isinf(evaluate(parse_expr("1/x"), {{"x", 0.0}})));
  EXPECT_TRUE(std::isnan(evaluate(parse_expr("x^0.5"), {{"x", -1.0}})));
}

TEST(Evaluate, CompiledMatchesTree) {
  RandomExpr gen(7);
  std::unordered_map<std::string, std::size_t> slots{{"a", 0}, {"b", 1}, {"c", 2}};
  for (int k = 0; k < 100; ++k) {
    const Expr e = gen.generate(4);
    const Bindings b = gen.point();
    const std::vector<double> values{b.at("a"), b.at("b"), b.at("c")};
    const double expected = evaluate(e, b);
    EXPECT_EQ(CompiledExpr(e, slots)(values), expected) << to_string(e);
  }
}

// ---- differentiation ------------------------------------------------------

TEST(Differentiate, Examples) {
  EXPECT_EQ(differentiate(parse_expr("0.5*u^2"), "u"), var("u"));
  EXPECT_EQ(differentiate(parse_expr("exp(x1) + cos(x2)"), "x1"), parse_expr("exp(x1)"));
  EXPECT_EQ(differentiate(parse_expr("exp(x1) + cos(x2)"), "x2"), -sin(var("x2")));
}

TEST(Differentiate, IndependentIsConstantZero) {
  EXPECT_EQ(differentiate(parse_expr("sin(a)*b + 3"), "z"), num(0));
}

TEST(Differentiate, Rules) {
  const Bindings b{{"x", 0.7}, {"y", -1.3}};
  struct Case {
    const char* f;
    const char* df;
  };
  for (const auto& [f, df] : std::vector<Case>{{"x*y", "y"},
                                               {"x/y", "1/y"},
                                               {"y/x", "-y/x^2"},
                                               {"sin(x^2)", "2*x*cos(x^2)"},
                                               {"cos(3*x)", "-3*sin(3*x)"},
                                               {"exp(-x)", "-exp(-x)"},
                                               {"(x+1)^1.5", "1.5*(x+1)^0.5"},
                                               {"-x", "-1"},
                                               {"x - y", "1"}}) {
    EXPECT_NEAR(evaluate(differentiate(parse_expr(f), "x"), b), evaluate(parse_expr(df), b), 1e-14) << f;
  }
}

TEST(Property, DerivativeMatchesCentralDifference) {
  RandomExpr gen(20240611);
  int checked = 0;
  while (checked < 200) {
    const Expr e = gen.generate(4);
    const Bindings b = gen.point();
    for (const auto& v : gen.variables()) {
      const double exact = evaluate(differentiate(e, v), b);
      const double fd = testing_support::central_difference(e, v, b);
      ASSERT_TRUE(std::isfinite(exact)) << to_string(e);
      EXPECT_LE(std::abs(fd - exact), 1e-6 * (1.0 + std::abs(exact))) << to_string(e) << " d/d" << v;
    }
    ++checked;
  }
}

// ---- folding ----------------------------------------------------------------

TEST(Fold, ListedIdentities) {
  const Expr x = var("x");
  EXPECT_EQ(x + 0.0, x);
  EXPECT_EQ(num(0) + x, x);
  EXPECT_EQ(x * 1.0, x);
  EXPECT_EQ(1.0 * x, x);
  EXPECT_EQ(x * 0.0, num(0));
  EXPECT_EQ(0.0 * x, num(0));
  EXPECT_EQ(pow(x, 1.0), x);
  EXPECT_EQ(pow(x, 0.0), num(1));
  EXPECT_EQ(-(-x), x);
  EXPECT_EQ(num(2) * num(3) + num(1), num(7));
}

TEST(Fold, NoCanonicalization) {
  // a+b and b+a stay distinct; folding does not reorder.
  EXPECT_FALSE(parse_expr("a+b") == parse_expr("b+a"));
  EXPECT_FALSE(parse_expr("x+x") == parse_expr("2*x"));
}

TEST(Property, FoldingPreservesValue) {
  RandomExpr gen(99);
  for (int k = 0; k < 300; ++k) {
    const Expr raw = gen.generate(5);
    const Expr folded = fold(raw);
    EXPECT_LE(size(folded), size(raw));
    for (int p = 0; p < 3; ++p) {
      const Bindings b = gen.point();
      const double a = evaluate(raw, b);
      const double f = evaluate(folded, b);
      EXPECT_NEAR(a, f, 1e-12 * (1.0 + std::abs(a))) << to_string(raw);
    }
  }
}

TEST(Property, ParsedTextFoldsSoundly) {
  RandomExpr gen(5);
  for (int k = 0; k < 200; ++k) {
    const std::string text = to_string(gen.generate(4));
    const Expr unfolded = parse_expr(text, {.fold = false});
    const Expr folded = parse_expr(text);
    const Bindings b = gen.point();
    EXPECT_NEAR(evaluate(unfolded, b), evaluate(folded, b), 1e-12 * (1.0 + std::abs(evaluate(unfolded, b)))) << text;
  }
}

// ---- printing ---------------------------------------------------------------

TEST(Print, MinimalParentheses) {
  EXPECT_EQ(to_string(parse_expr("0.5*u^2")), "0.5*u^2");
  EXPECT_EQ(to_string(parse_expr("a - (b - c)")), "a - (b - c)");
  EXPECT_EQ(to_string(parse_expr("(a - b) - c")), "a - b - c");
  EXPECT_EQ(to_string(parse_expr("a/(b*c)")), "a/(b*c)");
  EXPECT_EQ(to_string(parse_expr("(a+b)^2")), "(a + b)^2");
  EXPECT_EQ(to_string(parse_expr("-(a+b)")), "-(a + b)");
  EXPECT_EQ(to_string(parse_expr("(-a)^2")), "(-a)^2");
}

TEST(Print, SeventeenDigitConstants) {
  EXPECT_EQ(to_string(num(0.1)), "0.10000000000000001");
  EXPECT_EQ(to_string(num(1e-20)), "9.9999999999999995e-21");
}

TEST(Property, PrintParseRoundTrip) {
  RandomExpr gen(31337);
  for (int k = 0; k < 300; ++k) {
    const Expr e = fold(gen.generate(5));
    EXPECT_EQ(parse_expr(to_string(e)), e);
  }
}

// ---- substitution -----------------------------------------------------------

TEST(Substitute, Examples) {
  EXPECT_EQ(substitute(parse_expr("x2"), {{"x2", parse_expr("u")}}), var("u"));
  EXPECT_EQ(substitute(parse_expr("0.5*u^2"), {{"u", num(3)}}), num(4.5));
  EXPECT_EQ(substitute(parse_expr("x1+x2"), {{"x1", var("x2")}, {"x2", var("x1")}}), parse_expr("x2+x1"));
}

TEST(Property, IdentitySubstitutionIsNoOp) {
  RandomExpr gen(12);
  for (int k = 0; k < 100; ++k) {
    const Expr e = fold(gen.generate(4));
    Replacements id;
    for (const auto& v : free_variables(e)) id.emplace(v, Expr::variable(v));
    EXPECT_EQ(substitute(e, id), e);
  }
}

// ---- linearize --------------------------------------------------------------

TEST(Linearize, Examples) {
  const std::vector<std::string> xu{"x1", "x2", "u"};
  const auto a = linearize(parse_expr("x2"), xu);
  ASSERT_TRUE(a);
  EXPECT_EQ(a->coefficients, (std::vector<double>{0, 1, 0}));
  EXPECT_EQ(a->constant, num(0));

  const std::vector<std::string> x{"x1", "x2"};
  EXPECT_FALSE(linearize(parse_expr("exp(x1)+cos(x2)"), x));

  const std::vector<std::string> u{"u"};
  const auto c = linearize(parse_expr("2*u + 3"), u);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->coefficients, std::vector<double>{2});
  EXPECT_EQ(c->constant, num(3));
}

TEST(Linearize, SymbolicConstantButNumericCoefficients) {
  const std::vector<std::string> x{"x"};
  const auto f = linearize(parse_expr("3*x + sin(t)"), x);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->coefficients, std::vector<double>{3});
  EXPECT_EQ(f->constant, parse_expr("sin(t)"));
  EXPECT_FALSE(f->constant_is_numeric());
  // coefficient depending on another symbol is not affine
  EXPECT_FALSE(linearize(parse_expr("t*x"), x));
  EXPECT_FALSE(linearize(parse_expr("x*x"), x));
}

TEST(Property, LinearizeReproducesValues) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  const std::vector<std::string> vars{"a", "b", "c"};
  for (int k = 0; k < 100; ++k) {
    // random affine combination with some non-trivial structure
    const double ca = d(rng), cb = d(rng), cc = d(rng), k0 = d(rng);
    const Expr e = (ca * Expr::variable("a") - Expr::variable("b") * cb) / 2.0 +
                   (Expr::variable("c") + k0) * cc - (Expr::variable("a") - Expr::variable("c")) * 0.5;
    const auto f = linearize(e, vars);
    ASSERT_TRUE(f);
    ASSERT_TRUE(f->constant_is_numeric());
    for (int p = 0; p < 5; ++p) {
      const Bindings b{{"a", d(rng)}, {"b", d(rng)}, {"c", d(rng)}};
      const double lin = f->coefficients[0] * b.at("a") + f->coefficients[1] * b.at("b") +
                         f->coefficients[2] * b.at("c") + f->constant.value();
      EXPECT_NEAR(lin, evaluate(e, b), 1e-12);
    }
  }
}

// ---- queries ----------------------------------------------------------------

TEST(Queries, FreeVariablesAndDependence) {
  const Expr e = parse_expr("a*sin(b) + 2");
  EXPECT_EQ(free_variables(e), (std::set<std::string>{"a", "b"}));
  EXPECT_TRUE(depends_on(e, "b"));
  EXPECT_FALSE(depends_on(e, "c"));
}

TEST(Structure, EqualityDistinguishesSignedZero) {
  EXPECT_FALSE(num(0.0) == num(-0.0));
  EXPECT_TRUE(num(std::numeric_limits<double>::quiet_NaN()) == num(std::numeric_limits<double>::quiet_NaN()));
}

TEST(Structure, PowRejectsVariableExponent) {
  EXPECT_THROW(Expr::raw_binary(BinaryOp::Pow, var("x"), var("y")), Error);
}
