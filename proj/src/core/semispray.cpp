#include "kjet/semispray.hpp"

#include <algorithm>
#include <cmath>

namespace kjet {

KSemispray::KSemispray(Context ctx, std::vector<Expr> coefficients)
    : ctx_(ctx.ambient()), g_(std::move(coefficients)) {
  if (g_.size() != static_cast<std::size_t>(ctx_.n())) {
    throw Error(ErrorCode::shape_mismatch, "semispray needs " + std::to_string(ctx_.n()) + " coefficients");
  }
  for (const auto& g : g_) {
    for (CoordId c : coordinates(g)) {
      if (!ctx_.contains(c)) {
        throw Error(ErrorCode::coord_out_of_range, "semispray coefficient uses " + to_string(c));
      }
    }
  }
}

VectorField assemble_field(const KSemispray& s) {
  const Context& ctx = s.context();
  VectorField gamma = gamma_operator(ctx);
  std::vector<Expr> c(gamma.components().begin(), gamma.components().end());
  Expr scale(-(ctx.k() + 1));
  for (int i = 1; i <= ctx.n(); ++i) {
    c[static_cast<std::size_t>(ctx.slot({ctx.k(), i}))] = scale * s.coefficient(i);
  }
  return VectorField(ctx, std::move(c));
}

CheckReport verify_semispray(const VectorField& field) {
  const Context& ctx = field.context();
  CheckReport report("semispray_criterion", 0.0);
  VectorField jx = tangent_structure_apply(field);
  VectorField target = liouville_field(ctx.k(), ctx);
  std::string offending;
  for (int level = 0; level <= ctx.k(); ++level) {
    auto a = jx.block(level);
    auto b = target.block(level);
    if (!std::equal(a.begin(), a.end(), b.begin())) {
      if (!offending.empty()) offending += ", ";
      offending += std::to_string(level);
    }
  }
  if (!offending.empty()) {
    report.passed = false;
    report.max_residual = 1.0;
    report.detail = "J(X) differs from Gamma(k) in level blocks " + offending;
  } else {
    report.detail = "J(X) = Gamma(k) symbolically";
  }
  return report;
}

CheckReport is_kspray(const KSemispray& s, std::span<const PhasePoint> samples, double tolerance) {
  const Context& ctx = s.context();
  CheckReport report("is_kspray", tolerance);
  for (int i = 1; i <= ctx.n(); ++i) {
    CheckReport r = euler_degree(s.coefficient(i), ctx.k() + 1, ctx, samples, tolerance);
    r.detail.clear();
    report.merge(r);
  }
  report.settle();
  return report;
}

KSemispray next_semispray(const KSemispray& s) {
  const Context& ctx = s.context();
  VectorField liouville = liouville_field(ctx.k(), ctx);
  Expr scale = Expr::constant(Rational(1, ctx.k() + 1));
  std::vector<Expr> g;
  g.reserve(s.coefficients().size());
  for (const auto& gi : s.coefficients()) g.push_back(scale * lie_apply(liouville, gi));
  return KSemispray(ctx, std::move(g));
}

std::vector<KSemispray> semispray_sequence(const KSemispray& s, int m) {
  if (m < 1) throw Error(ErrorCode::precondition, "sequence length must be >= 1");
  std::vector<KSemispray> out{s};
  out.reserve(static_cast<std::size_t>(m));
  while (static_cast<int>(out.size()) < m) out.push_back(next_semispray(out.back()));
  return out;
}

std::vector<Expr> transform_coefficients(const KSemispray& s, const ChartMap& chart) {
  const Context& ctx = s.context();
  if (!(chart.context() == ctx)) throw Error(ErrorCode::shape_mismatch, "chart context differs");
  auto top = prolong_chart(chart).back();
  VectorField gamma = gamma_operator(ctx);
  Expr inv = Expr::constant(Rational(1, ctx.k() + 1));
  std::vector<Expr> out;
  for (int i = 0; i < ctx.n(); ++i) {
    Expr acc;
    for (int j = 0; j < ctx.n(); ++j) acc += s.coefficients()[static_cast<std::size_t>(j)] * chart.jacobian()(i, j);
    out.push_back(acc - inv * lie_apply(gamma, top[static_cast<std::size_t>(i)]));
  }
  return out;
}

CheckReport verify_coefficient_covariance(const KSemispray& s, const ChartMap& chart,
                                          std::span<const PhasePoint> samples, double tolerance) {
  const Context& ctx = s.context();
  const int n = ctx.n(), k = ctx.k();
  CheckReport report("semispray_covariance", tolerance);

  std::vector<Expr> tilde_g = transform_coefficients(s, chart);
  std::vector<Expr> tilde_u = prolonged_coordinates(chart);
  VectorField field = assemble_field(s);
  VectorField gamma = gamma_operator(ctx);

  // Route 1: the coefficient law, (k+1)(G~ - J G) + Gamma(y~(k)) = 0.
  std::vector<Expr> law;
  for (int i = 0; i < n; ++i) {
    Expr jg;
    for (int j = 0; j < n; ++j) jg += chart.jacobian()(i, j) * s.coefficients()[static_cast<std::size_t>(j)];
    law.push_back(Expr(k + 1) * (tilde_g[static_cast<std::size_t>(i)] - jg) +
                  lie_apply(gamma, tilde_u[static_cast<std::size_t>(k * n + i)]));
  }

  // Route 2: push-forward components S(u~) against the canonical form.
  std::vector<Expr> push;
  for (int level = 0; level <= k; ++level) {
    for (int i = 0; i < n; ++i) {
      Expr su = lie_apply(field, tilde_u[static_cast<std::size_t>(level * n + i)]);
      Expr expected = level < k ? Expr(level + 1) * tilde_u[static_cast<std::size_t>((level + 1) * n + i)]
                                : Expr(-(k + 1)) * tilde_g[static_cast<std::size_t>(i)];
      push.push_back(su - expected);
    }
  }

  for (const auto& p : samples) {
    chart.jacobian_at(p);
    double worst = 0.0;
    for (const auto& e : law) worst = std::max(worst, std::abs(evaluate(e, p)));
    for (const auto& e : push) worst = std::max(worst, std::abs(evaluate(e, p)));
    report.record(worst, p);
  }
  return report.settle();
}

double max_coefficient_gap(const KSemispray& a, const KSemispray& b, std::span<const PhasePoint> samples,
                           PhasePoint* worst) {
  double gap = -1.0;
  for (const auto& p : samples) {
    for (std::size_t i = 0; i < a.coefficients().size(); ++i) {
      double d = std::abs(evaluate(a.coefficients()[i], p) - evaluate(b.coefficients()[i], p));
      if (d > gap) {
        gap = d;
        if (worst) *worst = p;
      }
    }
  }
  return std::max(gap, 0.0);
}

}  // namespace kjet
