#pragma once

#include <span>
#include <string>
#include <vector>

#include "kjet/expr.hpp"

namespace kjet {

/// Numeric point of T^kM. y[m-1][i-1] holds y(m,i). In an extended context,
/// x carries the auxiliary coordinates after the n base coordinates.
struct PhasePoint {
  std::vector<double> x;
  std::vector<std::vector<double>> y;

  static PhasePoint zeros(const Context& ctx);

  /// Build from natural-frame order (x, y(1), ..., y(k)), length (k+1)n.
  static PhasePoint from_flat(const Context& ctx, std::span<const double> values);
  std::vector<double> flat() const;

  double at(CoordId c) const;
  double& at(CoordId c);

  /// max_i |y(1,i)|
  double velocity_norm() const;

  std::string str() const;

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Recursive IEEE evaluation. Throws Error(eval) on a pole, a log or sqrt of
/// a nonpositive argument, or a non-finite result, and
/// Error(shape_mismatch) when p lacks a coordinate used by e.
double evaluate(const Expr& e, const PhasePoint& p);

}  // namespace kjet
