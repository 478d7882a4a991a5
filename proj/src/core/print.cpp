#include <string>

#include "expr_internal.hpp"

namespace kjet {

namespace {

std::string rational_str(const Rational& q) { return q.get_str(); }

bool atomic(const Expr& e) {
  return e.kind() == NodeKind::coordinate || e.kind() == NodeKind::function ||
         (e.kind() == NodeKind::constant && e.value() >= 0 && e.value().get_den() == 1);
}

std::string str_rec(const Expr& e);

std::string base_str(const Expr& base) {
  return atomic(base) ? str_rec(base) : "(" + str_rec(base) + ")";
}

std::string factor_str(const Expr& base, int exp) {
  if (exp == 1) return base_str(base);
  return base_str(base) + "^" + std::to_string(exp);
}

// Magnitude of a term, sign handled by the caller.
std::string term_body(const Term& t) {
  Rational mag = abs(t.coeff);
  std::string num, den;
  for (const auto& f : t.factors) {
    if (f.exp > 0) {
      if (!num.empty()) num += "*";
      num += factor_str(f.base, f.exp);
    } else {
      den += "/" + factor_str(f.base, -f.exp);
    }
  }
  std::string out;
  if (num.empty()) {
    out = rational_str(mag);
  } else if (mag == 1) {
    out = num;
  } else {
    out = rational_str(mag) + "*" + num;
  }
  return out + den;
}

std::string str_rec(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::constant:
      return rational_str(e.value());
    case NodeKind::coordinate:
      return to_string(e.coord());
    case NodeKind::function:
      return std::string(to_string(e.function())) + "(" + str_rec(e.children()[0]) + ")";
    case NodeKind::power:
    case NodeKind::product: {
      Term t = to_term(e);
      return (t.coeff < 0 ? "-" : "") + term_body(t);
    }
    case NodeKind::sum: {
      std::string out;
      bool first = true;
      for (const auto& c : e.children()) {
        Term t = to_term(c);
        bool negative = t.coeff < 0;
        if (first) {
          out += (negative ? "-" : "") + term_body(t);
        } else {
          out += (negative ? " - " : " + ") + term_body(t);
        }
        first = false;
      }
      return out;
    }
  }
  return {};
}

}  // namespace

std::string Expr::str() const { return str_rec(*this); }

}  // namespace kjet
