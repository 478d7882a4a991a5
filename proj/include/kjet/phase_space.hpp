#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kjet/check.hpp"
#include "kjet/field.hpp"
#include "kjet/linalg.hpp"
#include "kjet/point.hpp"

namespace kjet {

/// Default null-section margin: sampled points satisfy max_i |y(1,i)| >= 0.1.
inline constexpr double kSlitMargin = 0.1;

/// Sampling box with one closed interval per level (level 0 = x), shared by
/// every index of that level.
struct Box {
  std::vector<std::pair<double, double>> levels;

  /// Uniform bounds [lo, hi] on every level of ctx.
  static Box uniform(const Context& ctx, double lo, double hi);
};

/// Deterministic admissible sample of count points. The stream is a
/// multiplicative congruential generator (std::minstd_rand) mapped onto the
/// box; y(1) is redrawn until it clears the margin. Throws
/// Error(invalid_domain) when the y(1) box cannot clear the margin.
std::vector<PhasePoint> sample_points(const Context& ctx, const Box& domain, int count,
                                      std::uint64_t seed, double margin = kSlitMargin);

/// A change of base coordinates x~(x). Targets depend on level-0 coordinates
/// only.
class ChartMap {
 public:
  ChartMap(Context ctx, std::vector<Expr> targets);

  static ChartMap identity(const Context& ctx);

  const Context& context() const noexcept { return ctx_; }
  std::span<const Expr> targets() const noexcept { return targets_; }

  /// J(i, j) = d x~^i / d x^j
  const ExprMatrix& jacobian() const noexcept { return jacobian_; }

  /// |det J| > 1e-8 at every sample.
  CheckReport check_invertible(std::span<const PhasePoint> samples) const;

  /// Numeric Jacobian at p; throws Error(singular_jacobian) when
  /// |det J| <= 1e-8.
  Eigen::MatrixXd jacobian_at(const PhasePoint& p) const;

 private:
  Context ctx_;
  std::vector<Expr> targets_;
  ExprMatrix jacobian_;
};

inline constexpr double kJacobianThreshold = 1e-8;

/// Prolonged chart: y~(m, i) for m = 1..k, as expressions in the original
/// coordinates. Result[m-1][i-1] = y~(m, i).
std::vector<std::vector<Expr>> prolong_chart(const ChartMap& chart);

/// All transformed coordinates (x~, y~(1), ..., y~(k)) in natural-frame
/// order.
std::vector<Expr> prolonged_coordinates(const ChartMap& chart);

/// The operator y(1) d/dx + 2 y(2) d/dy(1) + ... + k y(k) d/dy(k-1).
VectorField gamma_operator(const Context& ctx);

/// The m-th Liouville field, sum_{a=1..m} a y(a) d/dy(k-m+a), 1 <= m <= k.
VectorField liouville_field(int m, const Context& ctx);

/// J shifts level blocks up by one slot: (J X) level m = X level m-1.
VectorField tangent_structure_apply(const VectorField& field);

/// Euler homogeneity test: max over samples of |L_{Gamma(k)} f - r f| / (1 + |f|).
CheckReport euler_degree(const Expr& f, int expected_degree, const Context& ctx,
                         std::span<const PhasePoint> samples, double tolerance = 1e-9);

/// Integer degree r with L_{Gamma(k)} f == r f symbolically, if any.
std::optional<int> homogeneity_degree(const Expr& f, const Context& ctx);

/// k-extension of a curve x(t): result[m][i-1] = (1/m!) d^m x^i / dt^m for
/// m = 0..k. The curve lives in an extended context whose auxiliary
/// coordinate `parameter` is t.
std::vector<std::vector<Expr>> k_extension(std::span<const Expr> curve, const Context& ctx,
                                           CoordId parameter);

}  // namespace kjet
