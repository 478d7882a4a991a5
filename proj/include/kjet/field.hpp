#pragma once

#include <span>
#include <vector>

#include "kjet/expr.hpp"

namespace kjet {

/// Vector field on T^kM in the natural frame, (k+1)n components ordered
/// d/dx^1..d/dx^n, d/dy(1,1)..d/dy(1,n), ..., d/dy(k,n).
class VectorField {
 public:
  VectorField(Context ctx, std::vector<Expr> components);

  static VectorField zero(const Context& ctx);

  const Context& context() const noexcept { return ctx_; }
  std::span<const Expr> components() const noexcept { return components_; }

  const Expr& component(CoordId c) const { return components_[static_cast<std::size_t>(ctx_.slot(c))]; }

  /// Components of the level-m block, m = 0..k.
  std::span<const Expr> block(int level) const;

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  Context ctx_;
  std::vector<Expr> components_;
};

/// Derivation of e along field: sum over slots of component * d(e)/d(coord).
Expr lie_apply(const VectorField& field, const Expr& e);

}  // namespace kjet
