#include <gtest/gtest.h>

#include <functional>

#include "kjet/lagrange_finsler.hpp"
#include "support.hpp"

using namespace kjet;
using kjet::testing::Rng;
using kjet::testing::uniform_int;

namespace {

Expr P(std::string_view s, const Context& ctx) { return parse_expr(s, ctx); }

LagrangianSpec spec(const Context& ctx, std::string_view L, bool finsler = false) {
  return {ctx, P(L, ctx), finsler, Box::uniform(ctx, -2, 2)};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::usage;
}

Box x_box(const Context& ctx, double lo, double hi) {
  Box b = Box::uniform(ctx, -2, 2);
  b.levels[0] = {lo, hi};
  return b;
}

// Positive definite Finsler F^2 with x-dependent coefficients, for k = 1 or 2.
LagrangianSpec random_finsler(const Context& ctx, Rng& rng) {
  const int n = ctx.n(), k = ctx.k();
  std::string f;
  auto add = [&](const std::string& term) { f += (f.empty() ? "" : " + ") + term; };
  std::string q;
  for (int i = 1; i <= n; ++i) q += (i > 1 ? " + " : "") + ("y(1," + std::to_string(i) + ")^2");
  for (int i = 1; i <= n; ++i) {
    std::string a = "(" + std::to_string(uniform_int(rng, 2, 4)) + " + x(" + std::to_string(i) + ")^2)";
    add(a + "*y(" + std::to_string(k) + "," + std::to_string(i) + ")^2");
  }
  if (k == 1 && n == 2) add(std::to_string(uniform_int(rng, -1, 1)) + "*y(1,1)*y(1,2)");
  if (k == 2) {
    add(std::to_string(uniform_int(rng, -1, 1)) + "/" + std::to_string(uniform_int(rng, 1, 2)) + "*y(2,1)*(" + q + ")");
    add("(" + q + ")^2");
  }
  return {ctx, P(f, ctx), true, Box::uniform(ctx, 0.5, 1.5)};
}

std::vector<PhasePoint> pts_for(const LagrangianSpec& s, int count = 100, std::uint64_t seed = 42) {
  return sample_points(s.ctx, s.domain, count, seed);
}

double matrix_gap(const ExprMatrix& a, const ExprMatrix& b, std::span<const PhasePoint> pts) {
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, kjet::testing::max_abs_diff(a.evaluate(p), b.evaluate(p)));
  return worst;
}

const Context c12(1, 2);
const Context c22(2, 2);
const Context c11(1, 1);

}  // namespace

TEST(Metric, Examples) {
  ExprMatrix one(1, 1);
  one(0, 0) = Expr(1);
  EXPECT_EQ(metric_tensor(spec(c12, "y(2,1)^2")).g, one);

  ExprMatrix hyper(2, 2);
  hyper(0, 1) = hyper(1, 0) = Expr::constant(Rational(1, 2));
  EXPECT_EQ(metric_tensor(spec(c22, "y(2,1)*y(2,2)")).g, hyper);

  ExprMatrix weighted(1, 1);
  weighted(0, 0) = Expr::x(1);
  EXPECT_EQ(metric_tensor(spec(c12, "x(1)*y(2,1)^2")).g, weighted);
}

TEST(Metric, SymbolicInverseOnlyForRegularSmallDimension) {
  EXPECT_TRUE(metric_tensor(spec(c22, "y(2,1)*y(2,2)")).g_inv.has_value());
  EXPECT_FALSE(metric_tensor(spec(c12, "x(1)")).g_inv.has_value());
  const Context c41(4, 1);
  EXPECT_FALSE(metric_tensor(spec(c41, "y(1,1)^2 + y(1,2)^2 + y(1,3)^2 + y(1,4)^2")).g_inv.has_value());
}

TEST(Metric, SymmetricForGeneratedLagrangians) {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    Context ctx(uniform_int(rng, 2, 3), uniform_int(rng, 1, 3));
    LagrangianSpec s{ctx, kjet::testing::random_polynomial(ctx, rng, 6, 4), false, Box::uniform(ctx, -2, 2)};
    MetricTensor m = metric_tensor(s);
    for (int i = 0; i < ctx.n(); ++i) {
      for (int j = 0; j < ctx.n(); ++j) EXPECT_TRUE((m.g(i, j) - m.g(j, i)).is_zero());
    }
  }
}

TEST(Regularity, Examples) {
  MetricTensor unit = metric_tensor(spec(c12, "y(2,1)^2"));
  auto pts = kjet::testing::samples(c12, 50);
  CheckReport r = regularity_check(unit, pts);
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.max_residual, 1.0);

  MetricTensor weighted = metric_tensor(spec(c12, "x(1)*y(2,1)^2"));
  CheckReport good = regularity_check(weighted, sample_points(c12, x_box(c12, 0.5, 2), 200, 42));
  EXPECT_TRUE(good.passed);
  EXPECT_GE(good.max_residual, 0.5);

  CheckReport bad = regularity_check(weighted, sample_points(c12, x_box(c12, -1, 1), 200, 42));
  EXPECT_FALSE(bad.passed);
  ASSERT_TRUE(bad.worst_point.has_value());
  EXPECT_LT(std::abs(bad.worst_point->x[0]), 0.05);
  EXPECT_DOUBLE_EQ(bad.max_residual, std::abs(bad.worst_point->x[0]));
}

TEST(Regularity, ExactlyDegenerateMetricFailsAtThreshold) {
  CheckReport r = regularity_check(metric_tensor(spec(c12, "x(1) + y(1,1)^2")), kjet::testing::samples(c12, 10));
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.max_residual, 0.0);
}

TEST(Signature, ConstantAndChangingPatterns) {
  auto pts = sample_points(c22, x_box(c22, 0.5, 2), 50, 7);
  EXPECT_TRUE(signature_check(metric_tensor(spec(c22, "y(2,1)^2 - x(1)*y(2,2)^2")), pts).passed);
  EXPECT_TRUE(signature_check(metric_tensor(spec(c22, "y(2,1)*y(2,2)")), pts).passed);
  auto wide = sample_points(c22, x_box(c22, -1, 1), 50, 7);
  CheckReport r = signature_check(metric_tensor(spec(c22, "y(2,1)^2 + x(1)*y(2,2)^2")), wide);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_residual, 0.0);
}

TEST(CanonicalSemispray, Examples) {
  EXPECT_EQ(canonical_semispray(spec(c12, "y(2,1)^2")).coefficient(1), Expr());
  EXPECT_EQ(canonical_semispray(spec(c12, "y(2,1)^2 + y(1,1)^2")).coefficient(1), P("-y(1,1)/3", c12));
  EXPECT_EQ(code_of([] { canonical_semispray(spec(c12, "x(1)")); }), ErrorCode::singular_metric);
}

TEST(CanonicalSemispray, LargeDimensionNeedsEvaluator) {
  const Context c42(4, 2);
  LagrangianSpec s = spec(c42, "(1 + x(1)^2)*y(2,1)^2 + (1 + x(2)^2)*y(2,2)^2 + (1 + x(3)^2)*y(2,3)^2 + "
                               "(1 + x(4)^2)*y(2,4)^2 + y(1,1)^2 + y(1,2)^2 + y(1,3)^2 + y(1,4)^2");
  EXPECT_EQ(code_of([&] { canonical_semispray(s); }), ErrorCode::precondition);
  CanonicalSemisprayEvaluator eval(s);
  // Diagonal metric: 6 (1 + x_i^2) G^i = 4 x_i y(1,i) y(2,i) - 2 y(1,i), per index.
  for (const auto& p : kjet::testing::samples(c42, 30)) {
    auto g = eval(p);
    ASSERT_EQ(g.size(), 4u);
    for (int i = 0; i < 4; ++i) {
      double x = p.x[i], y1 = p.y[0][i], y2 = p.y[1][i];
      EXPECT_NEAR(g[i], (4 * x * y1 * y2 - 2 * y1) / (6 * (1 + x * x)), 1e-12);
    }
  }
}

TEST(CanonicalSemispray, EvaluatorMatchesSymbolicRoute) {
  Rng rng(67);
  for (int trial = 0; trial < 4; ++trial) {
    Context ctx(uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
    LagrangianSpec s = random_finsler(ctx, rng);
    KSemispray sym = canonical_semispray(s);
    CanonicalSemisprayEvaluator eval(s);
    for (const auto& p : pts_for(s, 30)) {
      auto g = eval(p);
      for (int i = 1; i <= ctx.n(); ++i) EXPECT_NEAR(g[i - 1], evaluate(sym.coefficient(i), p), 1e-10);
    }
  }
}

TEST(CanonicalSemispray, EvaluatorReportsSingularPoint) {
  CanonicalSemisprayEvaluator eval(spec(c12, "x(1)*y(2,1)^2"));
  PhasePoint p = PhasePoint::zeros(c12);
  p.y[0][0] = 1;
  EXPECT_EQ(code_of([&] { eval(p); }), ErrorCode::singular_metric);
  p.x[0] = 2;
  EXPECT_NO_THROW(eval(p));
}

TEST(Finsler, Examples) {
  auto pts12 = kjet::testing::samples(c12, 100);
  EXPECT_TRUE(finsler_check(spec(c12, "y(1,1)^4 + y(2,1)^2", true), pts12).passed);
  EXPECT_TRUE(finsler_check(spec(c11, "y(1,1)^2", true), kjet::testing::samples(c11, 100)).passed);
  CheckReport neg = finsler_check(spec(c12, "-y(2,1)^2", true), pts12);
  EXPECT_FALSE(neg.passed);
  EXPECT_NE(neg.detail.find("positivity"), std::string::npos);
  EXPECT_NE(neg.detail.find("definiteness"), std::string::npos);
}

TEST(Finsler, HomogeneityAndDeclarationFailures) {
  auto pts = kjet::testing::samples(c12, 50);
  CheckReport r = finsler_check(spec(c12, "y(1,1)^2 + y(2,1)^2", true), pts);
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("homogeneity"), std::string::npos);
  EXPECT_FALSE(finsler_check(spec(c12, "y(1,1)^4 + y(2,1)^2", false), pts).passed);
}

TEST(Cartan, WorkedExample) {
  LagrangianSpec s = spec(c12, "y(1,1)^4 + y(2,1)^2", true);
  auto pts = kjet::testing::samples(c12, 100);
  EXPECT_EQ(canonical_semispray(s).coefficient(1), P("-2/3*y(1,1)^3", c12));
  DualCoefficients m = cartan_connection(s, pts);
  EXPECT_TRUE(m.level(1).is_zero());
  EXPECT_TRUE(m.level(2).is_zero());

  DualCoefficients b = bucataru_connection(canonical_semispray(s));
  EXPECT_TRUE(b.level(1).is_zero());
  EXPECT_EQ(b.level(2)(0, 0), P("-2*y(1,1)^2", c12));
  EXPECT_TRUE(euler_degree(b.level(2)(0, 0), 2, c12, pts).passed);
}

TEST(Cartan, Euclidean) {
  LagrangianSpec s = spec(c11, "y(1,1)^2", true);
  EXPECT_EQ(canonical_semispray(s).coefficient(1), Expr());
  EXPECT_TRUE(cartan_connection(s, kjet::testing::samples(c11, 20)).level(1).is_zero());
}

TEST(Cartan, RejectsNonFinslerInput) {
  auto pts = kjet::testing::samples(c12, 20);
  EXPECT_EQ(code_of([&] { cartan_connection(spec(c12, "-y(2,1)^2", true), pts); }), ErrorCode::finsler_axiom_violation);
  EXPECT_EQ(code_of([&] { cartan_connection(spec(c12, "y(2,1)^2 + y(1,1)^2", true), pts); }),
            ErrorCode::finsler_axiom_violation);
}

TEST(Cartan, LevelOneClosedFormMatchesMironRoute) {
  Rng rng(71);
  for (int trial = 0; trial < 6; ++trial) {
    Context ctx(uniform_int(rng, 1, 2), uniform_int(rng, 1, 2));
    LagrangianSpec s = random_finsler(ctx, rng);
    auto pts = pts_for(s, 40);
    DualCoefficients m = cartan_connection(s, pts);
    EXPECT_LE(matrix_gap(cartan_level_one(s), m.level(1), pts), 1e-9);
  }
}

TEST(FinslerProperties, WorkedExampleIsASprayWithConstantSequence) {
  KSemispray g = canonical_semispray(spec(c12, "y(1,1)^4 + y(2,1)^2", true));
  EXPECT_TRUE(is_kspray(g, kjet::testing::samples(c12, 100)).passed);
  EXPECT_EQ(homogeneity_degree(g.coefficient(1), c12), 3);
  auto seq = semispray_sequence(g, 5);
  for (const auto& s : seq) EXPECT_EQ(s, g);
}

TEST(FinslerProperties, GeneratedLagrangians) {
  Rng rng(73);
  const std::vector<Context> shapes{Context(1, 1), Context(2, 1), Context(1, 2), Context(2, 2)};
  for (const auto& ctx : shapes) {
    for (int trial = 0; trial < 2; ++trial) {
      LagrangianSpec s = random_finsler(ctx, rng);
      auto pts = pts_for(s);
      SCOPED_TRACE(s.L.str());
      ASSERT_TRUE(finsler_check(s, pts).passed);
      EXPECT_TRUE(regularity_check(metric_tensor(s), pts).passed);
      KSemispray g = canonical_semispray(s);
      CheckReport spray = is_kspray(g, pts);
      EXPECT_TRUE(spray.passed) << spray.max_residual;

      auto seq = semispray_sequence(g, 5);
      for (const auto& t : seq) EXPECT_LE(max_coefficient_gap(t, g, pts), 1e-9);

      DualCoefficients cartan = cartan_connection(s, pts);
      DualCoefficients buc = bucataru_connection(g);
      for (int m = 1; m <= ctx.k(); ++m) {
        for (int i = 0; i < ctx.n(); ++i) {
          for (int j = 0; j < ctx.n(); ++j) {
            EXPECT_TRUE(euler_degree(cartan.level(m)(i, j), m, ctx, pts).passed);
            EXPECT_TRUE(euler_degree(buc.level(m)(i, j), m, ctx, pts).passed);
          }
        }
      }
      for (int step = 1; step <= 2; ++step) {
        for (ConnectionKind kind : {ConnectionKind::miron, ConnectionKind::bucataru}) {
          DualCoefficients later = make_connection(seq[static_cast<std::size_t>(step)], kind);
          DualCoefficients first = make_connection(g, kind);
          for (int m = 1; m <= ctx.k(); ++m) EXPECT_LE(matrix_gap(later.level(m), first.level(m), pts), 1e-9);
        }
      }
    }
  }
}
