#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kjet/check.hpp"
#include "kjet/connections.hpp"
#include "kjet/linalg.hpp"
#include "kjet/phase_space.hpp"
#include "kjet/semispray.hpp"

namespace kjet {

/// Largest n for which the inverse metric is formed symbolically.
inline constexpr int kSymbolicInverseMaxDim = 3;
/// Pivot magnitude below which the numeric LU treats the metric as singular.
inline constexpr double kPivotThreshold = 1e-10;
/// |det g| threshold of the regularity check.
inline constexpr double kRegularityThreshold = 1e-8;

/// Order-k Lagrangian; with finsler set, L is F^2.
struct LagrangianSpec {
  Context ctx{1, 1};
  Expr L;
  bool finsler = false;
  Box domain;
};

struct MetricTensor {
  Context ctx{1, 1};
  ExprMatrix g;
  /// Symbolic inverse when n <= 3 and det g is not identically zero;
  /// otherwise inverses are formed per point.
  std::optional<ExprMatrix> g_inv;
};

/// g_ij = 1/2 d^2 L / dy(k,i) dy(k,j)
MetricTensor metric_tensor(const LagrangianSpec& spec);

/// Passes iff |det g| > threshold at every sample and det g keeps one sign
/// across them; max_residual carries the smallest |det g| seen and
/// worst_point where it occurred.
CheckReport regularity_check(const MetricTensor& m, std::span<const PhasePoint> samples,
                             double threshold = kRegularityThreshold);

/// Passes iff every sample has nonsingular g and one leading-minor sign
/// pattern (+, - or 0 per minor) holds across all samples.
CheckReport signature_check(const MetricTensor& m, std::span<const PhasePoint> samples);

/// Bracket B_j = Gamma(dL/dy(k,j)) - dL/dy(k-1,j), y(0) meaning x.
std::vector<Expr> euler_lagrange_bracket(const LagrangianSpec& spec);

/// G^i = (1/(2(k+1))) g^ij B_j as expressions. Requires n <= 3; throws
/// Error(singular_metric) when det g is the zero expression and
/// Error(precondition) for larger n, where CanonicalSemisprayEvaluator is the
/// route.
KSemispray canonical_semispray(const LagrangianSpec& spec);

/// Per-point evaluation of the canonical semispray through LU with partial
/// pivoting; usable for any n.
class CanonicalSemisprayEvaluator {
 public:
  explicit CanonicalSemisprayEvaluator(const LagrangianSpec& spec);

  /// Throws Error(singular_metric) when a pivot falls below the threshold.
  std::vector<double> operator()(const PhasePoint& p) const;

  const Context& context() const noexcept { return ctx_; }

 private:
  Context ctx_;
  ExprMatrix g_;
  std::vector<Expr> bracket_;
};

/// F^2 > 0, euler_degree(F^2, 2k) and leading minors of g all positive at
/// every sample.
CheckReport finsler_check(const LagrangianSpec& spec, std::span<const PhasePoint> samples);

/// Miron connection of the canonical semispray of F^2. Rechecks the Finsler
/// conditions at samples and throws Error(finsler_axiom_violation) when they
/// fail.
DualCoefficients cartan_connection(const LagrangianSpec& spec, std::span<const PhasePoint> samples);

/// Closed form of the level-1 Cartan coefficient, written directly from F^2:
/// (1/(2(k+1))) d/dy(k,j) [ g^ih (Gamma(dF^2/dy(k,h)) - dF^2/dy(k-1,h)) ].
ExprMatrix cartan_level_one(const LagrangianSpec& spec);

}  // namespace kjet
