#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "kjet/error.hpp"

namespace kjet {

using Rational = mpq_class;

/// Coordinate on T^kM: level 0 is the base coordinate x(index), level m >= 1
/// is y(m, index). Indices are 1-based.
struct CoordId {
  int level = 0;
  int index = 1;

  friend auto operator<=>(const CoordId&, const CoordId&) = default;
};

/// Ambient dimensions (n, k) plus an optional number of auxiliary level-0
/// coordinates x(n+1) .. x(n+auxiliary). Auxiliary coordinates carry curve
/// parameters and homogeneity scalings; they never appear in natural frames.
class Context {
 public:
  Context(int n, int k, int auxiliary = 0);

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  int auxiliary() const noexcept { return auxiliary_; }

  /// Dimension (k+1)n of the natural frame.
  int dim() const noexcept { return (k_ + 1) * n_; }

  Context with_auxiliary(int count) const { return Context(n_, k_, auxiliary_ + count); }
  Context ambient() const { return Context(n_, k_, 0); }

  /// First auxiliary coordinate added by with_auxiliary(1).
  CoordId auxiliary_coord(int which = 1) const { return {0, n_ + which}; }

  bool contains(CoordId c) const noexcept;

  /// Natural-frame slot of c: level * n + (index - 1). Auxiliary coordinates
  /// have no slot.
  int slot(CoordId c) const;
  CoordId coord_at(int slot) const;

  friend bool operator==(const Context&, const Context&) = default;

 private:
  int n_;
  int k_;
  int auxiliary_;
};

enum class NodeKind : std::uint8_t {
  constant = 0,
  coordinate = 1,
  sum = 2,
  product = 3,
  power = 4,
  function = 5,
};

enum class Function : std::uint8_t { sqrt, exp, log, sin, cos };

const char* to_string(Function f) noexcept;

struct Node;

/// Immutable symbolic expression, always held in canonical form.
///
/// Canonical form: a sum of terms, each term a rational coefficient times a
/// product of factors base^e with integer e != 0. Bases are coordinates,
/// function applications, or (for negative e only) a multi-term sum whose
/// leading coefficient is 1. Products of sums are expanded, like terms and
/// like factors are merged, and children are sorted by the total order
/// constant < coordinate (level, index) < composite (kind, then children).
/// Negation and quotients have no node of their own: they become a -1
/// coefficient and negative exponents.
class Expr {
 public:
  Expr();  // zero
  Expr(long value);  // NOLINT(google-explicit-constructor)

  static Expr constant(const Rational& value);
  static Expr coordinate(CoordId c);
  static Expr x(int index) { return coordinate({0, index}); }
  static Expr y(int level, int index) { return coordinate({level, index}); }
  static Expr apply(Function f, const Expr& arg);

  NodeKind kind() const noexcept;
  const Rational& value() const;  // constant
  CoordId coord() const;          // coordinate
  Function function() const;      // function
  int exponent() const;           // power
  std::span<const Expr> children() const noexcept;

  bool is_constant() const noexcept { return kind() == NodeKind::constant; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;

  std::size_t hash() const noexcept;

  /// Lossless text in the parser grammar.
  std::string str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend bool operator==(const Expr& a, const Expr& b) noexcept;
  friend std::strong_ordering operator<=>(const Expr& a, const Expr& b) noexcept;

  const Node* node() const noexcept { return node_.get(); }

  /// Conservative dependency filter: false means e certainly does not
  /// contain c.
  bool may_depend_on(CoordId c) const noexcept;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend struct ExprBuilder;

  std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, int exponent);
Expr sqrt(const Expr& e);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);

/// Rebuild e bottom-up through the canonicalizing constructors.
Expr canonicalize(const Expr& e);

/// Parse text in the expression grammar. Throws SyntaxError or
/// Error(coord_out_of_range).
Expr parse_expr(std::string_view text, const Context& ctx);

/// Exact partial derivative with respect to v.
Expr differentiate(const Expr& e, CoordId v);

/// Simultaneous substitution of coordinates. Keys must lie in ctx.
Expr substitute(const Expr& e, const std::map<CoordId, Expr>& bindings, const Context& ctx);

bool depends_on(const Expr& e, CoordId c);

/// Largest coordinate level appearing in e, or -1 for a constant.
int max_level(const Expr& e);

/// Every coordinate appearing in e, sorted.
std::vector<CoordId> coordinates(const Expr& e);

std::string to_string(CoordId c);

}  // namespace kjet

template <>
struct std::hash<kjet::Expr> {
  std::size_t operator()(const kjet::Expr& e) const noexcept { return e.hash(); }
};
