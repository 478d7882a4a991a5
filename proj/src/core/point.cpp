#include "kjet/point.hpp"

#include <cmath>
#include <cstdio>

namespace kjet {

PhasePoint PhasePoint::zeros(const Context& ctx) {
  PhasePoint p;
  p.x.assign(static_cast<std::size_t>(ctx.n() + ctx.auxiliary()), 0.0);
  p.y.assign(static_cast<std::size_t>(ctx.k()), std::vector<double>(static_cast<std::size_t>(ctx.n()), 0.0));
  return p;
}

PhasePoint PhasePoint::from_flat(const Context& ctx, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(ctx.dim())) {
    throw Error(ErrorCode::shape_mismatch, "expected " + std::to_string(ctx.dim()) +
                                               " state values, got " + std::to_string(values.size()));
  }
  PhasePoint p = zeros(ctx.ambient());
  const auto n = static_cast<std::size_t>(ctx.n());
  for (std::size_t i = 0; i < n; ++i) p.x[i] = values[i];
  for (std::size_t m = 0; m < p.y.size(); ++m) {
    for (std::size_t i = 0; i < n; ++i) p.y[m][i] = values[(m + 1) * n + i];
  }
  return p;
}

std::vector<double> PhasePoint::flat() const {
  std::vector<double> out;
  const std::size_t n = y.empty() ? x.size() : y.front().size();
  out.insert(out.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(n, x.size())));
  for (const auto& level : y) out.insert(out.end(), level.begin(), level.end());
  return out;
}

namespace {

template <class P>
auto& coordinate_ref(P& p, CoordId c) {
  const auto i = static_cast<std::size_t>(c.index - 1);
  if (c.index < 1) throw Error(ErrorCode::shape_mismatch, "bad index in " + to_string(c));
  if (c.level == 0) {
    if (i >= p.x.size()) throw Error(ErrorCode::shape_mismatch, "point lacks " + to_string(c));
    return p.x[i];
  }
  const auto m = static_cast<std::size_t>(c.level - 1);
  if (c.level < 0 || m >= p.y.size() || i >= p.y[m].size()) {
    throw Error(ErrorCode::shape_mismatch, "point lacks " + to_string(c));
  }
  return p.y[m][i];
}

}  // namespace

double PhasePoint::at(CoordId c) const { return coordinate_ref(*this, c); }

double& PhasePoint::at(CoordId c) { return coordinate_ref(*this, c); }

double PhasePoint::velocity_norm() const {
  double norm = 0.0;
  if (!y.empty()) {
    for (double v : y.front()) norm = std::max(norm, std::abs(v));
  }
  return norm;
}

std::string PhasePoint::str() const {
  std::string out = "(";
  char buf[32];
  bool first = true;
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    if (!first) out += ", ";
    out += buf;
    first = false;
  };
  for (double v : x) emit(v);
  for (const auto& level : y) {
    out += ";";
    first = true;
    out += " ";
    for (double v : level) emit(v);
  }
  return out + ")";
}

namespace {

[[noreturn]] void eval_error(const std::string& what) { throw Error(ErrorCode::eval, what); }

double integer_power(double base, int e) {
  if (e < 0) {
    if (base == 0.0) eval_error("division by zero");
    return 1.0 / integer_power(base, -e);
  }
  double result = 1.0;
  while (e) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

double eval_rec(const Expr& e, const PhasePoint& p) {
  switch (e.kind()) {
    case NodeKind::constant:
      return e.value().get_d();
    case NodeKind::coordinate:
      return p.at(e.coord());
    case NodeKind::sum: {
      double acc = 0.0;
      for (const auto& c : e.children()) acc += eval_rec(c, p);
      return acc;
    }
    case NodeKind::product: {
      double acc = 1.0;
      for (const auto& c : e.children()) acc *= eval_rec(c, p);
      return acc;
    }
    case NodeKind::power:
      return integer_power(eval_rec(e.children()[0], p), e.exponent());
    case NodeKind::function: {
      double u = eval_rec(e.children()[0], p);
      switch (e.function()) {
        case Function::sqrt:
          if (u <= 0.0) eval_error("sqrt of nonpositive argument");
          return std::sqrt(u);
        case Function::log:
          if (u <= 0.0) eval_error("log of nonpositive argument");
          return std::log(u);
        case Function::exp: return std::exp(u);
        case Function::sin: return std::sin(u);
        case Function::cos: return std::cos(u);
      }
    }
  }
  return 0.0;
}

}  // namespace

double evaluate(const Expr& e, const PhasePoint& p) {
  double v = eval_rec(e, p);
  if (!std::isfinite(v)) eval_error("non-finite value of " + e.str() + " at " + p.str());
  return v;
}

}  // namespace kjet
