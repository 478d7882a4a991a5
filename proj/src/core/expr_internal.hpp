#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "kjet/expr.hpp"

namespace kjet {

struct Node {
  NodeKind kind = NodeKind::constant;
  Rational value;
  CoordId coord;
  Function fn = Function::sqrt;
  int exponent = 0;
  std::vector<Expr> children;
  std::size_t hash = 0;
  std::uint64_t vars = 0;  // bloom filter over appearing coordinates
  int max_level = -1;
};

struct ExprBuilder {
  static Expr make_constant(const Rational& value);
  static Expr make_coordinate(CoordId c);
  static Expr make_composite(NodeKind kind, std::vector<Expr> children, int exponent = 0,
                             Function fn = Function::sqrt);
};

std::strong_ordering compare_nodes(const Node& a, const Node& b) noexcept;

struct Factor {
  Expr base;
  int exp;
};

struct Term {
  Rational coeff = 1;
  std::vector<Factor> factors;  // sorted by base, exponents nonzero
};

using Poly = std::vector<Term>;

Term to_term(const Expr& e);
Poly to_poly(const Expr& e);
Expr from_term(const Term& t);
Expr from_poly(const Poly& p);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& p, int e);
Poly normalize(const Poly& p);

}  // namespace kjet
