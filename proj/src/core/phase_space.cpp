#include "kjet/phase_space.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace kjet {

Box Box::uniform(const Context& ctx, double lo, double hi) {
  return Box{std::vector<std::pair<double, double>>(static_cast<std::size_t>(ctx.k() + 1), {lo, hi})};
}

std::vector<PhasePoint> sample_points(const Context& ctx, const Box& domain, int count,
                                      std::uint64_t seed, double margin) {
  if (domain.levels.size() != static_cast<std::size_t>(ctx.k() + 1)) {
    throw Error(ErrorCode::invalid_domain, "domain needs bounds for levels 0.." + std::to_string(ctx.k()));
  }
  for (const auto& [lo, hi] : domain.levels) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw Error(ErrorCode::invalid_domain, "domain bounds must be finite with lo <= hi");
    }
  }
  const auto [vlo, vhi] = domain.levels[1];
  if (std::max(std::abs(vlo), std::abs(vhi)) < margin) {
    throw Error(ErrorCode::invalid_domain, "y(1) box lies inside the null-section margin " + std::to_string(margin));
  }
  if (count <= 0) return {};

  std::minstd_rand stream(static_cast<std::minstd_rand::result_type>(seed % 2147483647ULL));
  constexpr double span = static_cast<double>(std::minstd_rand::max() - std::minstd_rand::min());
  auto draw = [&](std::pair<double, double> b) {
    double u = static_cast<double>(stream() - std::minstd_rand::min()) / span;
    return b.first + u * (b.second - b.first);
  };

  const Context ambient = ctx.ambient();
  std::vector<PhasePoint> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    PhasePoint p = PhasePoint::zeros(ambient);
    for (auto& v : p.x) v = draw(domain.levels[0]);
    int attempts = 0;
    do {
      if (++attempts > 10000) {
        throw Error(ErrorCode::invalid_domain, "could not draw y(1) outside the null-section margin");
      }
      for (auto& v : p.y[0]) v = draw(domain.levels[1]);
    } while (p.velocity_norm() < margin);
    for (std::size_t m = 1; m < p.y.size(); ++m) {
      for (auto& v : p.y[m]) v = draw(domain.levels[m + 1]);
    }
    points.push_back(std::move(p));
  }
  return points;
}

// ---------------------------------------------------------------------------

ChartMap::ChartMap(Context ctx, std::vector<Expr> targets)
    : ctx_(ctx.ambient()), targets_(std::move(targets)), jacobian_(ctx_.n(), ctx_.n()) {
  if (targets_.size() != static_cast<std::size_t>(ctx_.n())) {
    throw Error(ErrorCode::invalid_chart, "chart needs " + std::to_string(ctx_.n()) + " target expressions");
  }
  for (const auto& t : targets_) {
    for (CoordId c : coordinates(t)) {
      if (c.level != 0 || c.index > ctx_.n()) {
        throw Error(ErrorCode::invalid_chart, "chart target " + t.str() + " depends on " + to_string(c));
      }
    }
  }
  for (int i = 0; i < ctx_.n(); ++i) {
    for (int j = 0; j < ctx_.n(); ++j) jacobian_(i, j) = differentiate(targets_[static_cast<std::size_t>(i)], {0, j + 1});
  }
}

ChartMap ChartMap::identity(const Context& ctx) {
  std::vector<Expr> t;
  for (int i = 1; i <= ctx.n(); ++i) t.push_back(Expr::x(i));
  return ChartMap(ctx, std::move(t));
}

CheckReport ChartMap::check_invertible(std::span<const PhasePoint> samples) const {
  CheckReport report("chart_jacobian", 0.0);
  double min_det = std::numeric_limits<double>::infinity();
  for (const auto& p : samples) {
    double det = std::abs(jacobian_.evaluate(p).determinant());
    if (det < min_det) {
      min_det = det;
      report.worst_point = p;
    }
  }
  report.passed = samples.empty() || min_det > kJacobianThreshold;
  report.max_residual = samples.empty() ? 0.0 : min_det;
  report.detail = "min |det J| = " + std::to_string(min_det);
  return report;
}

Eigen::MatrixXd ChartMap::jacobian_at(const PhasePoint& p) const {
  Eigen::MatrixXd j = jacobian_.evaluate(p);
  if (std::abs(j.determinant()) <= kJacobianThreshold) {
    throw Error(ErrorCode::singular_jacobian, "chart Jacobian is singular at " + p.str());
  }
  return j;
}

std::vector<std::vector<Expr>> prolong_chart(const ChartMap& chart) {
  const Context& ctx = chart.context();
  VectorField gamma = gamma_operator(ctx);
  std::vector<std::vector<Expr>> levels;
  std::vector<Expr> previous(chart.targets().begin(), chart.targets().end());
  for (int m = 1; m <= ctx.k(); ++m) {
    std::vector<Expr> next;
    next.reserve(previous.size());
    Expr scale = Expr::constant(Rational(1, m));
    for (const auto& e : previous) next.push_back(scale * lie_apply(gamma, e));
    levels.push_back(next);
    previous = std::move(next);
  }
  return levels;
}

std::vector<Expr> prolonged_coordinates(const ChartMap& chart) {
  std::vector<Expr> out(chart.targets().begin(), chart.targets().end());
  for (auto& level : prolong_chart(chart)) out.insert(out.end(), level.begin(), level.end());
  return out;
}

VectorField gamma_operator(const Context& ctx) {
  std::vector<Expr> c(static_cast<std::size_t>(ctx.dim()));
  for (int level = 0; level < ctx.k(); ++level) {
    for (int i = 1; i <= ctx.n(); ++i) {
      c[static_cast<std::size_t>(ctx.slot({level, i}))] = Expr(level + 1) * Expr::y(level + 1, i);
    }
  }
  return VectorField(ctx, std::move(c));
}

VectorField liouville_field(int m, const Context& ctx) {
  if (m < 1 || m > ctx.k()) {
    throw Error(ErrorCode::index_out_of_range, "Liouville field index " + std::to_string(m) +
                                                   " outside 1.." + std::to_string(ctx.k()));
  }
  std::vector<Expr> c(static_cast<std::size_t>(ctx.dim()));
  for (int a = 1; a <= m; ++a) {
    for (int i = 1; i <= ctx.n(); ++i) {
      c[static_cast<std::size_t>(ctx.slot({ctx.k() - m + a, i}))] = Expr(a) * Expr::y(a, i);
    }
  }
  return VectorField(ctx, std::move(c));
}

VectorField tangent_structure_apply(const VectorField& field) {
  const Context& ctx = field.context();
  const auto n = static_cast<std::size_t>(ctx.n());
  std::vector<Expr> c(static_cast<std::size_t>(ctx.dim()));
  for (std::size_t s = n; s < c.size(); ++s) c[s] = field.components()[s - n];
  return VectorField(ctx, std::move(c));
}

CheckReport euler_degree(const Expr& f, int expected_degree, const Context& ctx,
                         std::span<const PhasePoint> samples, double tolerance) {
  CheckReport report("euler_degree(" + std::to_string(expected_degree) + ")", tolerance);
  Expr gap = lie_apply(liouville_field(ctx.k(), ctx), f) - Expr(expected_degree) * f;
  for (const auto& p : samples) {
    try {
      double fv = evaluate(f, p);
      double gv = gap.is_zero() ? 0.0 : evaluate(gap, p);
      report.record(std::abs(gv) / (1.0 + std::abs(fv)), p);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (at sample " + p.str() + ")");
    }
  }
  if (gap.is_zero()) report.detail = "symbolically exact";
  return report.settle();
}

std::optional<int> homogeneity_degree(const Expr& f, const Context& ctx) {
  if (f.is_zero()) return std::nullopt;
  Expr g = lie_apply(liouville_field(ctx.k(), ctx), f);
  PhasePoint probe = PhasePoint::zeros(ctx.ambient());
  double seed = 0.7548776662466927;
  for (auto& v : probe.x) v = (seed = std::fmod(seed * 1.618033988749895 + 0.1, 1.0)) + 0.5;
  for (auto& level : probe.y) {
    for (auto& v : level) v = (seed = std::fmod(seed * 1.618033988749895 + 0.1, 1.0)) + 0.5;
  }
  try {
    double fv = evaluate(f, probe);
    if (fv == 0.0) return std::nullopt;
    long r = std::lround(evaluate(g, probe) / fv);
    if (g == Expr(r) * f) return static_cast<int>(r);
  } catch (const Error&) {
  }
  return std::nullopt;
}

std::vector<std::vector<Expr>> k_extension(std::span<const Expr> curve, const Context& ctx,
                                           CoordId parameter) {
  if (!ctx.contains(parameter) || parameter.level != 0 || parameter.index <= ctx.n()) {
    throw Error(ErrorCode::coord_out_of_range, "curve parameter must be an auxiliary coordinate");
  }
  std::vector<std::vector<Expr>> out;
  std::vector<Expr> current(curve.begin(), curve.end());
  out.push_back(current);
  for (int m = 1; m <= ctx.k(); ++m) {
    Expr scale = Expr::constant(Rational(1, m));
    for (auto& e : current) e = scale * differentiate(e, parameter);
    out.push_back(current);
  }
  return out;
}

}  // namespace kjet
