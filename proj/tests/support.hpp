#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "kjet/connections.hpp"
#include "kjet/expr.hpp"
#include "kjet/phase_space.hpp"
#include "kjet/semispray.hpp"

namespace kjet::testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline CoordId random_coord(const Context& ctx, Rng& rng) {
  return {uniform_int(rng, 0, ctx.k()), uniform_int(rng, 1, ctx.n())};
}

/// Sum of `terms` monomials with small integer coefficients and per-term
/// total degree up to max_degree.
inline Expr random_polynomial(const Context& ctx, Rng& rng, int terms = 4, int max_degree = 3) {
  Expr out;
  for (int t = 0; t < terms; ++t) {
    int c = uniform_int(rng, -5, 5);
    if (c == 0) c = 1;
    Expr term(c);
    int degree = uniform_int(rng, 0, max_degree);
    for (int d = 0; d < degree; ++d) term *= Expr::coordinate(random_coord(ctx, rng));
    out += term;
  }
  return out;
}

/// Monomial homogeneous of weighted degree `degree` under y(m) -> lambda^m
/// y(m): y-factors carry weight equal to their level, x-factors weight 0.
/// Returns the monomial and its degree.
inline std::pair<Expr, int> random_homogeneous_monomial(const Context& ctx, Rng& rng) {
  Expr m = Expr::constant(Rational(uniform_int(rng, 1, 9), uniform_int(rng, 1, 4)));
  int degree = 0;
  int factors = uniform_int(rng, 1, 4);
  for (int f = 0; f < factors; ++f) {
    CoordId c = random_coord(ctx, rng);
    m *= Expr::coordinate(c);
    degree += c.level;
  }
  return {m, degree};
}

/// Weighted-homogeneous polynomial of the given degree built from y(1..k)
/// and x factors; used as spray coefficients when degree = k + 1.
inline Expr random_homogeneous(const Context& ctx, Rng& rng, int degree, int terms = 3) {
  Expr out;
  for (int t = 0; t < terms; ++t) {
    Expr term(uniform_int(rng, 1, 4) * (uniform_int(rng, 0, 1) ? 1 : -1));
    int left = degree;
    while (left > 0) {
      int level = uniform_int(rng, 1, std::min(left, ctx.k()));
      term *= Expr::y(level, uniform_int(rng, 1, ctx.n()));
      left -= level;
    }
    if (uniform_int(rng, 0, 1)) term *= Expr::x(uniform_int(rng, 1, ctx.n()));
    out += term;
  }
  return out;
}

inline KSemispray random_semispray(const Context& ctx, Rng& rng, bool spray) {
  std::vector<Expr> g;
  for (int i = 0; i < ctx.n(); ++i) {
    g.push_back(spray ? random_homogeneous(ctx, rng, ctx.k() + 1) : random_polynomial(ctx, rng, 3, 3));
  }
  return KSemispray(ctx, std::move(g));
}

inline DualCoefficients random_dual(const Context& ctx, Rng& rng) {
  DualCoefficients d{ctx, {}};
  for (int m = 1; m <= ctx.k(); ++m) {
    ExprMatrix mat(ctx.n(), ctx.n());
    for (int i = 0; i < ctx.n(); ++i) {
      for (int j = 0; j < ctx.n(); ++j) mat(i, j) = random_polynomial(ctx, rng, 2, 2);
    }
    d.M.push_back(std::move(mat));
  }
  return d;
}

inline std::vector<PhasePoint> samples(const Context& ctx, int count, std::uint64_t seed = 42, double lo = -2.0,
                                       double hi = 2.0) {
  return sample_points(ctx, Box::uniform(ctx, lo, hi), count, seed);
}

/// Central difference of e along coordinate v at p.
inline double central_difference(const Expr& e, CoordId v, PhasePoint p, double h) {
  const double base = p.at(v);
  p.at(v) = base + h;
  const double up = evaluate(e, p);
  p.at(v) = base - h;
  const double down = evaluate(e, p);
  return (up - down) / (2.0 * h);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace kjet::testing
