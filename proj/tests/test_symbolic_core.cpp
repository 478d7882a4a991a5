#include <gtest/gtest.h>

#include "kjet/field.hpp"
#include "kjet/phase_space.hpp"
#include "support.hpp"

using namespace kjet;
using kjet::testing::Rng;
using kjet::testing::uniform_int;

namespace {

const Context c12(1, 2);
const Context c22(2, 2);

PhasePoint point12(double x, double y1, double y2) {
  PhasePoint p = PhasePoint::zeros(c12);
  p.x[0] = x;
  p.y[0][0] = y1;
  p.y[1][0] = y2;
  return p;
}

Expr P(std::string_view s, const Context& ctx = c12) { return parse_expr(s, ctx); }

}  // namespace

TEST(Parse, PowerOfCoordinate) {
  Expr e = P("y(2,1)^2");
  ASSERT_EQ(e.kind(), NodeKind::power);
  EXPECT_EQ(e.exponent(), 2);
  ASSERT_EQ(e.children().size(), 1u);
  EXPECT_EQ(e.children()[0].kind(), NodeKind::coordinate);
  EXPECT_EQ(e.children()[0].coord(), (CoordId{2, 1}));
}

TEST(Parse, SumOfProductAndConstant) {
  Expr e = P("x(1)*y(1,2) + 3", c22);
  ASSERT_EQ(e.kind(), NodeKind::sum);
  ASSERT_EQ(e.children().size(), 2u);
  EXPECT_TRUE(e.children()[0].is_constant());
  EXPECT_EQ(e.children()[0].value(), Rational(3));
  EXPECT_EQ(e.children()[1].kind(), NodeKind::product);
  EXPECT_EQ(e, Expr::x(1) * Expr::y(1, 2) + Expr(3));
}

TEST(Parse, CoordinateOutOfRange) {
  try {
    P("y(3,1)");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::coord_out_of_range);
  }
  EXPECT_THROW(P("x(2)"), Error);
}

TEST(Parse, SyntaxErrorsReportPosition) {
  try {
    P("y(1,1) + * 2");
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::syntax);
    EXPECT_EQ(e.position(), 9u);
  }
  EXPECT_THROW(P("y(1,1"), SyntaxError);
  EXPECT_THROW(P("y(1,1)^x(1)"), SyntaxError);
  EXPECT_THROW(P("foo(2)"), SyntaxError);
  EXPECT_THROW(P(""), SyntaxError);
  EXPECT_THROW(P("1/0"), SyntaxError);
}

TEST(Parse, NumbersAreExact) {
  EXPECT_EQ(P("0.1"), Expr::constant(Rational(1, 10)));
  EXPECT_EQ(P("1/3"), Expr::constant(Rational(1, 3)));
  EXPECT_EQ(P("2.5e-1"), Expr::constant(Rational(1, 4)));
  EXPECT_EQ(P("-y(1,1)/3"), Expr::constant(Rational(-1, 3)) * Expr::y(1, 1));
  EXPECT_EQ(P("2^-2"), Expr::constant(Rational(1, 4)));
  EXPECT_EQ(P("x(1)^(-1) * x(1)"), Expr(1));
}

TEST(Canonical, IdentitiesFold) {
  Expr x = Expr::x(1);
  EXPECT_EQ(x + Expr(0), x);
  EXPECT_EQ(x * Expr(1), x);
  EXPECT_TRUE((x * Expr(0)).is_zero());
  EXPECT_EQ(pow(x, 0), Expr(1));
  EXPECT_TRUE((x - x).is_zero());
  EXPECT_EQ(x * x, pow(x, 2));
  EXPECT_EQ(P("(x(1) + y(1,1))^2"), P("x(1)^2 + 2*x(1)*y(1,1) + y(1,1)^2"));
  EXPECT_EQ(P("y(1,1)*x(1)"), P("x(1)*y(1,1)"));
  EXPECT_EQ(sqrt(x) * sqrt(x), x);
  EXPECT_EQ(sqrt(Expr(4)), Expr(2));
}

TEST(Canonical, PrintsInParserGrammar) {
  EXPECT_EQ(P("-y(1,1)/3").str(), "-1/3*y(1,1)");
  EXPECT_EQ(P("y(2,1) + y(1,1)^2/2").str(), "y(2,1) + 1/2*y(1,1)^2");
  EXPECT_EQ(Expr().str(), "0");
}

TEST(Differentiate, Examples) {
  EXPECT_EQ(differentiate(P("y(2,1)^2"), {2, 1}), P("2*y(2,1)"));
  EXPECT_EQ(differentiate(P("x(1)*y(1,2)", c22), {0, 1}), Expr::y(1, 2));
  Expr inner = differentiate(P("y(2,1)^2 + y(1,1)^2"), {2, 1});
  EXPECT_TRUE(differentiate(inner, {1, 1}).is_zero());
  // Oracle on the inner derivative: central difference of 2 y(2,1) along y(1,1).
  for (double y1 : {0.3, 1.7, -2.2}) {
    EXPECT_NEAR(kjet::testing::central_difference(inner, {1, 1}, point12(0.5, y1, 1.3), 1e-5), 0.0, 1e-9);
  }
}

TEST(Differentiate, FunctionsAndQuotients) {
  PhasePoint p = point12(0.7, 1.3, -0.4);
  const char* cases[] = {"sqrt(x(1)^2 + y(1,1)^2)", "exp(x(1)*y(2,1))", "log(1 + y(1,1)^2)", "sin(x(1))*cos(y(1,1))",
                         "x(1)/(1 + y(1,1)^2)", "y(1,1)^3/(x(1) + 2)^2", "sqrt(x(1))^3"};
  for (const char* text : cases) {
    Expr e = P(text);
    for (CoordId v : {CoordId{0, 1}, CoordId{1, 1}, CoordId{2, 1}}) {
      double fd = kjet::testing::central_difference(e, v, p, 1e-5);
      EXPECT_NEAR(evaluate(differentiate(e, v), p), fd, 1e-6 * (1 + std::abs(fd))) << text << " d/d" << to_string(v);
    }
  }
}

TEST(Differentiate, MatchesCentralDifferenceOnRandomPolynomials) {
  Rng rng(7);
  const Context ctx(2, 3);
  auto pts = kjet::testing::samples(ctx, 200, 11);
  for (int t = 0; t < 200; ++t) {
    Expr e = kjet::testing::random_polynomial(ctx, rng, 5, 4);
    CoordId v = kjet::testing::random_coord(ctx, rng);
    const PhasePoint& p = pts[static_cast<std::size_t>(t)];
    double fd = kjet::testing::central_difference(e, v, p, 1e-5);
    EXPECT_LE(std::abs(evaluate(differentiate(e, v), p) - fd), 1e-5 * (1 + std::abs(fd))) << e.str();
  }
}

TEST(Evaluate, Examples) {
  EXPECT_DOUBLE_EQ(evaluate(P("y(2,1)^2"), point12(0, 1, 3)), 9.0);
  EXPECT_DOUBLE_EQ(evaluate(P("y(2,1)^2 + y(1,1)^2"), point12(1, 2, 3)), 13.0);
  try {
    evaluate(P("1/x(1)"), point12(0, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::eval);
  }
  EXPECT_THROW(evaluate(P("log(x(1))"), point12(-1, 1, 1)), Error);
  EXPECT_THROW(evaluate(P("sqrt(x(1))"), point12(-1, 1, 1)), Error);
}

TEST(Substitute, Examples) {
  Context ext = c12.with_auxiliary(1);
  Expr lambda = Expr::coordinate(ext.auxiliary_coord());
  Expr scaled = substitute(P("y(1,1)^3"), {{CoordId{1, 1}, lambda * Expr::y(1, 1)}}, ext);
  EXPECT_EQ(scaled, pow(lambda, 3) * pow(Expr::y(1, 1), 3));
  EXPECT_EQ(substitute(Expr::x(1), {}, c12), Expr::x(1));
  EXPECT_EQ(substitute(Expr::y(2, 1), {{CoordId{2, 1}, Expr(2) * Expr::y(2, 1)}}, c12), Expr(2) * Expr::y(2, 1));
  try {
    substitute(Expr::x(1), {{CoordId{3, 1}, Expr(1)}}, c12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::coord_out_of_range);
  }
}

TEST(Substitute, IsSimultaneous) {
  Expr e = P("x(1) + 2*y(1,1)");
  Expr swapped = substitute(e, {{CoordId{0, 1}, Expr::y(1, 1)}, {CoordId{1, 1}, Expr::x(1)}}, c12);
  EXPECT_EQ(swapped, P("y(1,1) + 2*x(1)"));
}

TEST(LieApply, Examples) {
  VectorField gamma = gamma_operator(c12);
  EXPECT_EQ(lie_apply(gamma, Expr::x(1)), Expr::y(1, 1));
  EXPECT_TRUE(lie_apply(gamma, P("2*y(2,1)")).is_zero());
  VectorField l2 = liouville_field(2, c12);
  EXPECT_EQ(lie_apply(l2, P("y(1,1)^3")), P("3*y(1,1)^3"));
  EXPECT_THROW(VectorField(c12, {Expr(1), Expr(2)}), Error);
}

TEST(Properties, CanonicalizationIsIdempotent) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Expr e = kjet::testing::random_polynomial(c22, rng, 5, 4);
    Expr q = e / (Expr(1) + kjet::testing::random_polynomial(c22, rng, 2, 2) * kjet::testing::random_polynomial(c22, rng, 2, 1));
    for (const Expr& f : {e, q, sqrt(pow(e, 2) + Expr(1)), exp(e) * e}) {
      Expr once = canonicalize(f);
      EXPECT_EQ(once, f);
      EXPECT_EQ(canonicalize(once), once);
      EXPECT_EQ(canonicalize(once).str(), once.str());
    }
  }
}

TEST(Properties, PrintParseRoundTrip) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    Expr e = kjet::testing::random_polynomial(c22, rng, 4, 3) /
             (Expr(2) + kjet::testing::random_polynomial(c22, rng, 2, 2));
    Expr f = t % 2 ? e : sin(e) - sqrt(pow(e, 2) + Expr(3)) * log(Expr(1) + pow(Expr::y(1, 1), 2));
    EXPECT_EQ(P(f.str(), c22), f) << f.str();
  }
}

TEST(Properties, LieApplyIsLinear) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    std::vector<Expr> comp;
    for (int s = 0; s < c22.dim(); ++s) comp.push_back(kjet::testing::random_polynomial(c22, rng, 2, 2));
    VectorField X(c22, comp);
    Expr e1 = kjet::testing::random_polynomial(c22, rng);
    Expr e2 = kjet::testing::random_polynomial(c22, rng);
    Expr a = Expr::constant(Rational(uniform_int(rng, -7, 7), uniform_int(rng, 1, 5)));
    EXPECT_EQ(lie_apply(X, a * e1 + e2), a * lie_apply(X, e1) + lie_apply(X, e2));
  }
}

TEST(Properties, LieApplyIsLeibniz) {
  Rng rng(13);
  auto pts = kjet::testing::samples(c22, 50, 17);
  for (int t = 0; t < 20; ++t) {
    std::vector<Expr> comp;
    for (int s = 0; s < c22.dim(); ++s) comp.push_back(kjet::testing::random_polynomial(c22, rng, 2, 2));
    VectorField X(c22, comp);
    Expr e1 = kjet::testing::random_polynomial(c22, rng);
    Expr e2 = sin(kjet::testing::random_polynomial(c22, rng, 2, 2));
    Expr lhs = lie_apply(X, e1 * e2);
    Expr rhs = lie_apply(X, e1) * e2 + e1 * lie_apply(X, e2);
    for (const auto& p : pts) {
      double l = evaluate(lhs, p), r = evaluate(rhs, p);
      EXPECT_LE(std::abs(l - r), 1e-9 * std::max(1.0, std::abs(r)));
    }
  }
}

TEST(Properties, MixedPartialsCommute) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    Expr e = kjet::testing::random_polynomial(c22, rng, 5, 4) / (Expr(1) + pow(Expr::x(2), 2));
    CoordId a = kjet::testing::random_coord(c22, rng), b = kjet::testing::random_coord(c22, rng);
    EXPECT_EQ(differentiate(differentiate(e, a), b), differentiate(differentiate(e, b), a));
  }
}
