#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "certsynth/compiled_expr.hpp"
#include "certsynth/expr.hpp"
#include "random_expr.hpp"

using namespace certsynth;

TEST(Parse, ProductMinusVariable) {
  Expr e = parse("x0*x1 - x0", 2);
  ASSERT_EQ(e.op(), Op::kSub);
  EXPECT_EQ(e.lhs().op(), Op::kMul);
  EXPECT_EQ(e.lhs().lhs().op(), Op::kVar);
  EXPECT_EQ(e.lhs().lhs().index(), 0);
  EXPECT_EQ(e.lhs().rhs().index(), 1);
  EXPECT_EQ(e.rhs().op(), Op::kVar);
  EXPECT_EQ(e.rhs().index(), 0);
}

TEST(Parse, SineOfThirdState) {
  Expr e = parse("sin(x2)", 3);
  ASSERT_EQ(e.op(), Op::kSin);
  EXPECT_EQ(e.lhs().op(), Op::kVar);
  EXPECT_EQ(e.lhs().index(), 2);
}

TEST(Parse, TrailingOperatorReportsOffset) {
  try {
    parse("x0 +", 1);
    FAIL() << "expected a parse error";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.offset(), 4u);
  }
}

TEST(Parse, RejectsUnknownIdentifierAndRange) {
  EXPECT_THROW(parse("foo(x0)", 1), ParseError);
  EXPECT_THROW(parse("x2", 2), ParseError);
  EXPECT_THROW(parse("u0", 2, 0), ParseError);
  EXPECT_NO_THROW(parse("u1 + x1", 2, 2));
}

TEST(Parse, Precedence) {
  const double x[] = {2.0};
  EXPECT_DOUBLE_EQ(eval(parse("-x0^2", 1), x), -4.0);
  EXPECT_DOUBLE_EQ(eval(parse("1 + 2*x0^3/4", 1), x), 5.0);
  EXPECT_DOUBLE_EQ(eval(parse("x0 - 1 - 1", 1), x), 0.0);
  EXPECT_DOUBLE_EQ(eval(parse("x0/2/2", 1), x), 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("-pi/2", 1), x), -std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(eval(parse("8/3*x0", 1), x), 16.0 / 3.0);
}

TEST(Eval, Basics) {
  const double p[] = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(eval(parse("x0^2 + x1^2", 2), p), 25.0);
  const double q[] = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(eval(parse("x0*x1 - x0", 2), q), 0.0);
  EXPECT_DOUBLE_EQ(eval(parse("tanh(0)", 1), q), 0.0);
  EXPECT_DOUBLE_EQ(eval(parse("sigmoid(x0)", 1), std::vector<double>{0.0}), 0.5);
  EXPECT_NEAR(eval(parse("softplus(x0)", 1), std::vector<double>{0.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(eval(parse("softplus(x0)", 1), std::vector<double>{800.0}), 800.0, 1e-12);
}

TEST(Eval, DivisionByZeroThrows) {
  const double p[] = {0.0};
  EXPECT_THROW(eval(parse("1/x0", 1), p), EvalError);
}

TEST(Diff, Examples) {
  Expr d = diff(parse("x0^3", 1), 0);
  EXPECT_TRUE(d.structurally_equal(parse("3*x0^2", 1))) << d.to_string();
  Expr t = diff(parse("tanh(x0)", 1), 0);
  EXPECT_TRUE(t.structurally_equal(parse("1 - tanh(x0)^2", 1))) << t.to_string();
  Expr m = diff(parse("x0*x1", 2), 1);
  EXPECT_TRUE(m.structurally_equal(parse("x0", 2))) << m.to_string();
}

TEST(Lie, Examples) {
  VectorField f = VectorField::parse({"-x0", "-x1"});
  Expr l = lie_derivative(parse("x0^2 + x1^2", 2), f);
  for (double a : {-1.0, 0.3, 2.0}) {
    const double p[] = {a, 0.7};
    EXPECT_NEAR(eval(l, p), -2 * a * a - 2 * 0.49, 1e-12);
  }
  VectorField rot = VectorField::parse({"x1", "-x0"});
  EXPECT_TRUE(lie_derivative(parse("x0", 2), rot).structurally_equal(parse("x1", 2)));
  EXPECT_THROW(lie_derivative(parse("x2", 3), f), std::invalid_argument);
}

// d/dt c(x(t)) at t = 0 by central differences of c along an RK4-integrated flow.
static double flow_derivative(const Expr& c, const VectorField& f, std::vector<double> x0) {
  auto step = [&](std::vector<double> x, double h) {
    auto add = [](const std::vector<double>& a, const std::vector<double>& b, double s) {
      std::vector<double> r(a);
      for (std::size_t i = 0; i < a.size(); ++i) r[i] += s * b[i];
      return r;
    };
    auto k1 = f.eval(x);
    auto k2 = f.eval(add(x, k1, h / 2));
    auto k3 = f.eval(add(x, k2, h / 2));
    auto k4 = f.eval(add(x, k3, h));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return x;
  };
  const double h = 1e-4;
  return (eval(c, step(x0, h)) - eval(c, step(x0, -h))) / (2 * h);
}

TEST(Lie, MatchesFlowFiniteDifferences) {
  VectorField f = VectorField::parse({"x0*x1 - x0", "-x1"});
  Expr c = parse("x0^2 + x1^2", 2);
  Expr l = lie_derivative(c, f);
  Expr closed_form = parse("2*x0^2*x1 - 2*x0^2 - 2*x1^2", 2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> p{u(rng), u(rng)};
    EXPECT_NEAR(eval(l, p), flow_derivative(c, f, p), 1e-5);
    EXPECT_NEAR(eval(l, p), eval(closed_form, p), 1e-12);
  }
}

TEST(Diff, FiniteDifferenceFuzz) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    Expr e = testing_support::random_expr(rng, 3, 4);
    for (int var = 0; var < 3; ++var) {
      Expr d = diff(e, var);
      std::vector<double> p{u(rng), u(rng), u(rng)};
      const double h = 1e-5;
      std::vector<double> lo(p), hi(p);
      lo[var] -= h;
      hi[var] += h;
      const double fd = (eval(e, hi) - eval(e, lo)) / (2 * h);
      const double exact = eval(d, p);
      EXPECT_LE(std::abs(exact - fd), 1e-4 * (1 + std::abs(exact))) << e.to_string();
      ++checked;
    }
  }
  EXPECT_EQ(checked, 300);
}

TEST(Interval, Examples) {
  Interval a = interval_eval(parse("x0^2", 1), std::vector<Interval>{Interval(-1, 2)});
  EXPECT_LE(a.lo(), 0.0);
  EXPECT_GE(a.lo(), -1e-300);
  EXPECT_NEAR(a.hi(), 4.0, 1e-12);
  Interval s = interval_eval(parse("sin(x0)", 1), std::vector<Interval>{Interval(0, std::numbers::pi)});
  EXPECT_NEAR(s.lo(), 0.0, 1e-12);
  EXPECT_NEAR(s.hi(), 1.0, 1e-12);
  EXPECT_LE(s.lo(), 0.0);
  EXPECT_GE(s.hi(), 1.0);
  EXPECT_THROW(interval_eval(parse("1/x0", 1), std::vector<Interval>{Interval(-1, 1)}), EnclosureError);
  EXPECT_THROW(Interval(2, 1), std::invalid_argument);
  EXPECT_THROW(Interval(0, INFINITY), std::invalid_argument);
}

TEST(Interval, SameOperandProductIsTightened) {
  Expr x = Expr::var(0);
  Interval r = interval_eval(x * x, std::vector<Interval>{Interval(-1, 2)});
  EXPECT_GE(r.lo(), -1e-300);
}

TEST(Interval, EnclosureFuzz) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  int escapes = 0;
  int cases = 0;
  while (cases < 1000) {
    Expr e = testing_support::random_expr(rng, 2, 4);
    std::vector<Interval> box;
    for (int i = 0; i < 2; ++i) {
      const double lo = u(rng);
      box.emplace_back(lo, lo + w(rng));
    }
    Interval enc;
    try {
      enc = interval_eval(e, box);
    } catch (const EnclosureError&) {
      continue;
    }
    ++cases;
    std::uniform_real_distribution<double> p0(box[0].lo(), box[0].hi()), p1(box[1].lo(), box[1].hi());
    for (int k = 0; k < 1000; ++k) {
      const double p[] = {k == 0 ? box[0].lo() : p0(rng), k == 0 ? box[1].hi() : p1(rng)};
      double v = 0.0;
      try {
        v = eval(e, p);
      } catch (const EvalError&) {
        continue;
      }
      if (!enc.contains(v)) ++escapes;
    }
  }
  EXPECT_EQ(escapes, 0);
}

TEST(Round, Examples) {
  Expr a = round_coefficients(parse("0.9999999*x0^2", 1), 1e-3);
  EXPECT_TRUE(a.structurally_equal(parse("x0^2", 1))) << a.to_string();
  Expr b = round_coefficients(parse("3.14159*x0", 1), 1e-2);
  EXPECT_TRUE(b.structurally_equal(parse("3.14*x0", 1))) << b.to_string();
  Expr c = round_coefficients(parse("4.9e-9*x0 + x1", 2), 1e-3);
  EXPECT_TRUE(c.structurally_equal(parse("x1", 2))) << c.to_string();
}

TEST(Round, Idempotent) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 200; ++k) {
    Expr e = testing_support::random_expr(rng, 3, 5);
    Expr once = round_coefficients(e, 1e-3);
    EXPECT_TRUE(round_coefficients(once, 1e-3).structurally_equal(once)) << e.to_string();
  }
}

TEST(Print, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    Expr e = testing_support::random_expr(rng, 3, 5);
    const std::string text = e.to_string();
    Expr back = parse(text, 3);
    // Parsing may fold constants the builder kept apart; after one pass the
    // text is a fixed point and the value is unchanged.
    EXPECT_EQ(parse(back.to_string(), 3).to_string(), back.to_string());
    const double p[] = {0.3, -0.7, 1.1};
    EXPECT_NEAR(eval(back, p), eval(e, p), 1e-9 * (1 + std::abs(eval(e, p))));
  }
  EXPECT_EQ(parse("-(x0 - x1)", 2).to_string(), "-(x0 - x1)");
  EXPECT_EQ(parse("x0 - (x1 - x0)", 2).to_string(), "x0 - (x1 - x0)");
}

TEST(Compiled, SharesSubtreesAndMatchesEval) {
  Expr s = sin(Expr::var(0));
  Expr e = s * s + s;
  CompiledExpr c(e);
  EXPECT_EQ(c.size(), e.dag_size());
  const double p[] = {0.3};
  EXPECT_DOUBLE_EQ(c.eval(p), eval(e, p));
}

TEST(Compiled, JetGradientMatchesSymbolic) {
  Expr e = parse("sigmoid(x0*x1) + tanh(x1)^2 - exp(x0)/(2 + x1^2)", 2);
  CompiledExpr c(e);
  struct Leaves {
    std::vector<double> x;
    Jet<double> constant(double v) const {
      Jet<double> j;
      j.v = v;
      j.n = 2;
      return j;
    }
    Jet<double> var(int i) const {
      Jet<double> j;
      j.v = x[i];
      j.n = 2;
      j.d[i] = 1.0;
      return j;
    }
    Jet<double> input(int) const { return {}; }
  } leaves{{0.4, -0.8}};
  std::vector<Jet<double>> regs;
  c.run(leaves, regs);
  const Jet<double>& out = regs[c.outputs()[0]];
  EXPECT_NEAR(out.v, eval(e, leaves.x), 1e-14);
  EXPECT_NEAR(out.d[0], eval(diff(e, 0), leaves.x), 1e-12);
  EXPECT_NEAR(out.d[1], eval(diff(e, 1), leaves.x), 1e-12);
}
