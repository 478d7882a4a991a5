#include <gtest/gtest.h>

#include "kjet/semispray.hpp"
#include "support.hpp"

using namespace kjet;
using kjet::testing::Rng;

namespace {

const Context c12(1, 2);

Expr P(std::string_view s, const Context& ctx = c12) { return parse_expr(s, ctx); }

KSemispray G12(std::string_view g) { return KSemispray(c12, {P(g)}); }

std::vector<Expr> comps(const VectorField& f) { return {f.components().begin(), f.components().end()}; }

PhasePoint point12(double x, double y1, double y2) {
  PhasePoint p = PhasePoint::zeros(c12);
  p.x[0] = x;
  p.y[0][0] = y1;
  p.y[1][0] = y2;
  return p;
}

}  // namespace

TEST(AssembleField, Examples) {
  EXPECT_EQ(comps(assemble_field(G12("0"))), (std::vector<Expr>{P("y(1,1)"), P("2*y(2,1)"), Expr()}));
  EXPECT_EQ(comps(assemble_field(G12("-y(1,1)/3"))), (std::vector<Expr>{P("y(1,1)"), P("2*y(2,1)"), P("y(1,1)")}));
  const Context c21(2, 1);
  EXPECT_EQ(comps(assemble_field(KSemispray(c21, {Expr(), Expr()}))),
            (std::vector<Expr>{Expr::y(1, 1), Expr::y(1, 2), Expr(), Expr()}));
}

TEST(KSemispray, RejectsBadShapes) {
  EXPECT_THROW(KSemispray(c12, {}), Error);
  const Context ext = c12.with_auxiliary(1);
  EXPECT_THROW(KSemispray(c12, {Expr::coordinate(ext.auxiliary_coord())}), Error);
}

TEST(VerifySemispray, AssembledFieldsPass) {
  Rng rng(2);
  for (const Context ctx : {Context(1, 2), Context(2, 2), Context(2, 3), Context(3, 1)}) {
    for (int t = 0; t < 5; ++t) {
      CheckReport r = verify_semispray(assemble_field(kjet::testing::random_semispray(ctx, rng, t % 2 == 0)));
      EXPECT_TRUE(r.passed) << r.detail;
    }
  }
}

TEST(VerifySemispray, GammaOperatorIsTheZeroSemispray) {
  VectorField gamma = gamma_operator(c12);
  EXPECT_EQ(gamma, assemble_field(G12("0")));
  EXPECT_TRUE(verify_semispray(gamma).passed);
}

TEST(VerifySemispray, ZeroAndLiouvilleFieldsFail) {
  CheckReport zero = verify_semispray(VectorField::zero(c12));
  EXPECT_FALSE(zero.passed);
  EXPECT_NE(zero.detail.find("1, 2"), std::string::npos) << zero.detail;
  CheckReport l = verify_semispray(liouville_field(2, c12));
  EXPECT_FALSE(l.passed);
}

TEST(IsKSpray, Examples) {
  auto pts = kjet::testing::samples(c12, 50);
  EXPECT_TRUE(is_kspray(G12("y(1,1)^3"), pts).passed);
  CheckReport r = is_kspray(G12("-y(1,1)/3"), pts);
  EXPECT_FALSE(r.passed);
  EXPECT_GE(r.max_residual, 1e-3);
  EXPECT_TRUE(is_kspray(G12("0"), pts).passed);
  EXPECT_TRUE(is_kspray(G12("y(1,1)*y(2,1)"), pts).passed);
}

TEST(NextSemispray, Examples) {
  EXPECT_EQ(next_semispray(G12("y(1,1)^3")), G12("y(1,1)^3"));
  EXPECT_EQ(next_semispray(G12("-y(1,1)/3")), G12("-y(1,1)/9"));
  EXPECT_EQ(next_semispray(G12("0")), G12("0"));
}

TEST(SemisprayStream, Examples) {
  auto spray = semispray_sequence(G12("y(1,1)^3"), 5);
  ASSERT_EQ(spray.size(), 5u);
  for (const auto& s : spray) EXPECT_EQ(s, spray.front());
  auto ns = semispray_sequence(G12("-y(1,1)/3"), 3);
  EXPECT_EQ(ns[0], G12("-y(1,1)/3"));
  EXPECT_EQ(ns[1], G12("-y(1,1)/9"));
  EXPECT_EQ(ns[2], G12("-y(1,1)/27"));
  EXPECT_EQ(semispray_sequence(G12("x(1)"), 1).size(), 1u);
  try {
    semispray_sequence(G12("0"), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}

TEST(TransformCoefficients, IdentityAndLinear) {
  KSemispray s = G12("x(1)*y(1,1)^2 + y(2,1)");
  EXPECT_EQ(transform_coefficients(s, ChartMap::identity(c12)), (std::vector<Expr>{s.coefficient(1)}));
  EXPECT_EQ(transform_coefficients(s, ChartMap(c12, {P("2*x(1)")})),
            (std::vector<Expr>{Expr(2) * s.coefficient(1)}));
}

TEST(TransformCoefficients, SquareChartAgainstDifferenceOracle) {
  // y~(2) = y(1)^2 + 2 x y(2). The right side of the law, evaluated with
  // central differences of y~(2): 3 G~ = -(y(1) dy~2/dx + 2 y(2) dy~2/dy(1)).
  auto ytilde2 = [](double x, double y1, double y2) { return y1 * y1 + 2 * x * y2; };
  const double x = 1, y1 = 1, y2 = 1, h = 1e-5;
  double ddx = (ytilde2(x + h, y1, y2) - ytilde2(x - h, y1, y2)) / (2 * h);
  double ddy1 = (ytilde2(x, y1 + h, y2) - ytilde2(x, y1 - h, y2)) / (2 * h);
  const double oracle = -(y1 * ddx + 2 * y2 * ddy1) / 3.0;
  auto g = transform_coefficients(G12("0"), ChartMap(c12, {P("x(1)^2")}));
  EXPECT_NEAR(evaluate(g[0], point12(x, y1, y2)), oracle, 1e-9);
  EXPECT_NEAR(oracle, -2.0, 1e-9);
}

TEST(Properties, SemisprayCriterionHoldsSymbolically) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const Context ctx(1 + t % 2, 1 + t % 3);
    EXPECT_TRUE(verify_semispray(assemble_field(kjet::testing::random_semispray(ctx, rng, false))).passed);
  }
}

TEST(Properties, SpraysAreFixedPoints) {
  Rng rng(6);
  for (const Context ctx : {Context(1, 2), Context(2, 2), Context(2, 3)}) {
    auto pts = kjet::testing::samples(ctx, 100, 19);
    for (int t = 0; t < 5; ++t) {
      KSemispray s = kjet::testing::random_semispray(ctx, rng, true);
      ASSERT_TRUE(is_kspray(s, pts).passed);
      KSemispray next = next_semispray(s);
      EXPECT_EQ(next, s);
      EXPECT_LE(max_coefficient_gap(next, s, pts), 1e-9);
    }
  }
}

TEST(Properties, NonSprayDiverges) {
  KSemispray s = G12("-y(1,1)/3");
  KSemispray next = next_semispray(s);
  for (const auto& p : kjet::testing::samples(c12, 100, 23)) {
    double gap = std::abs(evaluate(next.coefficient(1), p) - evaluate(s.coefficient(1), p));
    EXPECT_NEAR(gap, 2.0 / 9.0 * std::abs(p.y[0][0]), 1e-12);
    EXPECT_GT(gap, 0.0);
  }
}

TEST(Properties, CoefficientCovariance) {
  Rng rng(8);
  const Box box = Box::uniform(c12, 0.5, 1.5);
  auto pts = sample_points(c12, box, 50, 29);
  for (const char* chart : {"x(1)", "2*x(1)", "x(1) + x(1)^3/10"}) {
    for (int t = 0; t < 3; ++t) {
      CheckReport r = verify_coefficient_covariance(kjet::testing::random_semispray(c12, rng, t == 0),
                                                    ChartMap(c12, {P(chart)}), pts);
      EXPECT_TRUE(r.passed) << chart << " residual " << r.max_residual;
    }
  }
  const Context c22(2, 2);
  auto pts2 = sample_points(c22, Box::uniform(c22, 0.5, 1.5), 50, 31);
  ChartMap chart2(c22, {P("x(1) + x(2)^2", c22), P("x(2) - x(1)/3", c22)});
  EXPECT_TRUE(verify_coefficient_covariance(kjet::testing::random_semispray(c22, rng, false), chart2, pts2).passed);
}
