#include "kjet/field.hpp"

namespace kjet {

VectorField::VectorField(Context ctx, std::vector<Expr> components)
    : ctx_(ctx.ambient()), components_(std::move(components)) {
  if (components_.size() != static_cast<std::size_t>(ctx_.dim())) {
    throw Error(ErrorCode::shape_mismatch, "vector field needs " + std::to_string(ctx_.dim()) +
                                               " components, got " + std::to_string(components_.size()));
  }
}

VectorField VectorField::zero(const Context& ctx) {
  return VectorField(ctx, std::vector<Expr>(static_cast<std::size_t>(ctx.dim())));
}

std::span<const Expr> VectorField::block(int level) const {
  if (level < 0 || level > ctx_.k()) {
    throw Error(ErrorCode::index_out_of_range, "level " + std::to_string(level));
  }
  return std::span<const Expr>(components_).subspan(static_cast<std::size_t>(level * ctx_.n()),
                                                    static_cast<std::size_t>(ctx_.n()));
}

Expr lie_apply(const VectorField& field, const Expr& e) {
  const Context& ctx = field.context();
  Expr acc;
  for (int s = 0; s < ctx.dim(); ++s) {
    const Expr& c = field.components()[static_cast<std::size_t>(s)];
    if (c.is_zero()) continue;
    CoordId v = ctx.coord_at(s);
    if (!e.may_depend_on(v)) continue;
    Expr d = differentiate(e, v);
    if (!d.is_zero()) acc += c * d;
  }
  return acc;
}

}  // namespace kjet
