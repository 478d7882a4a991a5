#pragma once

#include <span>
#include <vector>

#include "kjet/check.hpp"
#include "kjet/field.hpp"
#include "kjet/phase_space.hpp"

namespace kjet {

/// k-semispray given by its coefficients G^i(x, y(1), ..., y(k)).
class KSemispray {
 public:
  KSemispray(Context ctx, std::vector<Expr> coefficients);

  const Context& context() const noexcept { return ctx_; }
  std::span<const Expr> coefficients() const noexcept { return g_; }
  const Expr& coefficient(int i) const { return g_.at(static_cast<std::size_t>(i - 1)); }

  friend bool operator==(const KSemispray&, const KSemispray&) = default;

 private:
  Context ctx_;
  std::vector<Expr> g_;
};

/// S = y(1) d/dx + 2 y(2) d/dy(1) + ... + k y(k) d/dy(k-1) - (k+1) G d/dy(k).
VectorField assemble_field(const KSemispray& s);

/// Symbolic test of J(X) = Gamma(k) block by block.
CheckReport verify_semispray(const VectorField& field);

/// Each G^i passes euler_degree with r = k+1.
CheckReport is_kspray(const KSemispray& s, std::span<const PhasePoint> samples, double tolerance = 1e-9);

/// Coefficients (1/(k+1)) L_{Gamma(k)} G^i.
KSemispray next_semispray(const KSemispray& s);

/// s, next(s), ..., m elements in total.
std::vector<KSemispray> semispray_sequence(const KSemispray& s, int m);

/// Coefficients of s in the chart x~, pulled back to the original
/// coordinates: (k+1) G~^i = (k+1) G^j dx~^i/dx^j - Gamma(y~(k,i)).
std::vector<Expr> transform_coefficients(const KSemispray& s, const ChartMap& chart);

/// Checks the transformed coefficients two ways at each sample: the
/// coefficient law itself, and the push-forward of S through the prolonged
/// chart, which must reproduce S(x~) = y~(1), S(y~(m)) = (m+1) y~(m+1) and
/// S(y~(k)) = -(k+1) G~.
CheckReport verify_coefficient_covariance(const KSemispray& s, const ChartMap& chart,
                                          std::span<const PhasePoint> samples, double tolerance = 1e-8);

/// max_i |G_a^i - G_b^i| over samples.
double max_coefficient_gap(const KSemispray& a, const KSemispray& b, std::span<const PhasePoint> samples,
                           PhasePoint* worst = nullptr);

}  // namespace kjet
