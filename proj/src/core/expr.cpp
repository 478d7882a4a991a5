#include "kjet/expr.hpp"

#include <algorithm>
#include <functional>

#include "expr_internal.hpp"

namespace kjet {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::syntax: return "SyntaxError";
    case ErrorCode::coord_out_of_range: return "CoordOutOfRange";
    case ErrorCode::eval: return "EvalError";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::invalid_chart: return "InvalidChart";
    case ErrorCode::invalid_domain: return "InvalidDomain";
    case ErrorCode::singular_jacobian: return "SingularJacobian";
    case ErrorCode::singular_metric: return "SingularMetric";
    case ErrorCode::finsler_axiom_violation: return "FinslerAxiomViolation";
    case ErrorCode::precondition: return "PreconditionViolation";
    case ErrorCode::io: return "IoError";
    case ErrorCode::usage: return "UsageError";
  }
  return "Error";
}

const char* to_string(Function f) noexcept {
  switch (f) {
    case Function::sqrt: return "sqrt";
    case Function::exp: return "exp";
    case Function::log: return "log";
    case Function::sin: return "sin";
    case Function::cos: return "cos";
  }
  return "?";
}

std::string to_string(CoordId c) {
  if (c.level == 0) return "x(" + std::to_string(c.index) + ")";
  return "y(" + std::to_string(c.level) + "," + std::to_string(c.index) + ")";
}

// ---------------------------------------------------------------------------
// Context

Context::Context(int n, int k, int auxiliary) : n_(n), k_(k), auxiliary_(auxiliary) {
  if (n < 1 || k < 1 || auxiliary < 0) {
    throw Error(ErrorCode::precondition, "context requires n >= 1, k >= 1, got n=" +
                                             std::to_string(n) + " k=" + std::to_string(k));
  }
}

bool Context::contains(CoordId c) const noexcept {
  if (c.level < 0 || c.level > k_ || c.index < 1) return false;
  if (c.level == 0) return c.index <= n_ + auxiliary_;
  return c.index <= n_;
}

int Context::slot(CoordId c) const {
  if (c.level < 0 || c.level > k_ || c.index < 1 || c.index > n_) {
    throw Error(ErrorCode::coord_out_of_range, to_string(c) + " has no natural-frame slot");
  }
  return c.level * n_ + (c.index - 1);
}

CoordId Context::coord_at(int slot) const {
  if (slot < 0 || slot >= dim()) {
    throw Error(ErrorCode::index_out_of_range, "slot " + std::to_string(slot));
  }
  return {slot / n_, slot % n_ + 1};
}

// ---------------------------------------------------------------------------
// Node construction and ordering

namespace {

constexpr std::size_t kHashSeed = 0x9e3779b97f4a7c15ULL;

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + kHashSeed + (h << 6) + (h >> 2));
}

std::uint64_t coord_bit(CoordId c) {
  return std::uint64_t{1} << ((static_cast<unsigned>(c.level) * 13u + static_cast<unsigned>(c.index)) % 64u);
}

std::size_t rational_hash(const Rational& q) {
  std::size_t h = std::hash<long>{}(mpz_get_si(q.get_num_mpz_t()));
  return mix(h, std::hash<long>{}(mpz_get_si(q.get_den_mpz_t())));
}

const Expr& zero_expr() {
  static const Expr z = ExprBuilder::make_constant(Rational(0));
  return z;
}

}  // namespace

Expr ExprBuilder::make_constant(const Rational& value) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::constant;
  node->value = value;
  node->value.canonicalize();
  node->hash = mix(1, rational_hash(node->value));
  return Expr(std::move(node));
}

Expr ExprBuilder::make_coordinate(CoordId c) {
  auto node = std::make_shared<Node>();
  node->kind = NodeKind::coordinate;
  node->coord = c;
  node->hash = mix(mix(2, static_cast<std::size_t>(c.level)), static_cast<std::size_t>(c.index));
  node->vars = coord_bit(c);
  node->max_level = c.level;
  return Expr(std::move(node));
}

Expr ExprBuilder::make_composite(NodeKind kind, std::vector<Expr> children, int exponent,
                                 Function fn) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->exponent = exponent;
  node->fn = fn;
  std::size_t h = mix(static_cast<std::size_t>(kind) + 7, static_cast<std::size_t>(exponent));
  h = mix(h, static_cast<std::size_t>(fn));
  for (const auto& c : children) {
    h = mix(h, c.hash());
    node->vars |= c.node()->vars;
    node->max_level = std::max(node->max_level, c.node()->max_level);
  }
  node->hash = h;
  node->children = std::move(children);
  return Expr(std::move(node));
}

namespace {

int kind_rank(NodeKind k) { return static_cast<int>(k); }

std::strong_ordering compare_rational(const Rational& a, const Rational& b) {
  int c = cmp(a, b);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::strong_ordering compare_lists(std::span<const Expr> a, std::span<const Expr> b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  }
  return a.size() <=> b.size();
}

}  // namespace

std::strong_ordering compare_nodes(const Node& a, const Node& b) noexcept {
  if (&a == &b) return std::strong_ordering::equal;
  if (a.kind != b.kind) return kind_rank(a.kind) <=> kind_rank(b.kind);
  switch (a.kind) {
    case NodeKind::constant:
      return compare_rational(a.value, b.value);
    case NodeKind::coordinate:
      return a.coord <=> b.coord;
    case NodeKind::sum:
      return compare_lists(a.children, b.children);
    case NodeKind::product: {
      // Monomial first, coefficient last, so that 2*y and 3*y sit together.
      std::span<const Expr> fa(a.children), fb(b.children);
      Rational ca = 1, cb = 1;
      if (!fa.empty() && fa.front().is_constant()) {
        ca = fa.front().value();
        fa = fa.subspan(1);
      }
      if (!fb.empty() && fb.front().is_constant()) {
        cb = fb.front().value();
        fb = fb.subspan(1);
      }
      if (auto c = compare_lists(fa, fb); c != 0) return c;
      return compare_rational(ca, cb);
    }
    case NodeKind::power:
      if (auto c = a.children[0] <=> b.children[0]; c != 0) return c;
      return a.exponent <=> b.exponent;
    case NodeKind::function:
      if (a.fn != b.fn) return static_cast<int>(a.fn) <=> static_cast<int>(b.fn);
      return a.children[0] <=> b.children[0];
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Term / polynomial algebra

namespace {

bool factors_less(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a[i].base <=> b[i].base; c != 0) return c < 0;
    if (a[i].exp != b[i].exp) return a[i].exp < b[i].exp;
  }
  return a.size() < b.size();
}

struct FactorsLess {
  bool operator()(const std::vector<Factor>& a, const std::vector<Factor>& b) const {
    return factors_less(a, b);
  }
};

Expr factor_expr(const Factor& f) {
  if (f.exp == 1) return f.base;
  return ExprBuilder::make_composite(NodeKind::power, {f.base}, f.exp);
}

Rational rational_pow(const Rational& q, int e) {
  Rational result = 1;
  Rational base = q;
  unsigned u = static_cast<unsigned>(e < 0 ? -e : e);
  while (u) {
    if (u & 1u) result *= base;
    base *= base;
    u >>= 1u;
  }
  if (e < 0) {
    if (result == 0) throw Error(ErrorCode::eval, "division by zero");
    result = 1 / result;
  }
  result.canonicalize();
  return result;
}

}  // namespace

Term to_term(const Expr& e) {
  Term t;
  switch (e.kind()) {
    case NodeKind::constant:
      t.coeff = e.value();
      break;
    case NodeKind::coordinate:
    case NodeKind::function:
    case NodeKind::sum:
      t.factors.push_back({e, 1});
      break;
    case NodeKind::power:
      t.factors.push_back({e.children()[0], e.exponent()});
      break;
    case NodeKind::product:
      for (const auto& c : e.children()) {
        if (c.is_constant()) {
          t.coeff = c.value();
        } else if (c.kind() == NodeKind::power) {
          t.factors.push_back({c.children()[0], c.exponent()});
        } else {
          t.factors.push_back({c, 1});
        }
      }
      break;
  }
  return t;
}

Poly to_poly(const Expr& e) {
  Poly p;
  if (e.kind() == NodeKind::sum) {
    p.reserve(e.children().size());
    for (const auto& c : e.children()) p.push_back(to_term(c));
  } else if (!e.is_zero()) {
    p.push_back(to_term(e));
  }
  return p;
}

Expr from_term(const Term& t) {
  if (t.factors.empty()) return ExprBuilder::make_constant(t.coeff);
  if (t.coeff == 1 && t.factors.size() == 1) return factor_expr(t.factors.front());
  std::vector<Expr> children;
  children.reserve(t.factors.size() + 1);
  if (t.coeff != 1) children.push_back(ExprBuilder::make_constant(t.coeff));
  for (const auto& f : t.factors) children.push_back(factor_expr(f));
  return ExprBuilder::make_composite(NodeKind::product, std::move(children));
}

Poly poly_add(const Poly& a, const Poly& b) {
  std::map<std::vector<Factor>, Rational, FactorsLess> acc;
  for (const Poly* p : {&a, &b}) {
    for (const auto& t : *p) {
      auto [it, inserted] = acc.try_emplace(t.factors, t.coeff);
      if (!inserted) it->second += t.coeff;
    }
  }
  Poly out;
  out.reserve(acc.size());
  for (auto& [factors, coeff] : acc) {
    if (coeff != 0) out.push_back({coeff, factors});
  }
  return out;
}

Expr from_poly(const Poly& p) {
  // The caller guarantees like terms are merged (poly_add output).
  if (p.empty()) return zero_expr();
  if (p.size() == 1) return from_term(p.front());
  std::vector<Expr> children;
  children.reserve(p.size());
  for (const auto& t : p) children.push_back(from_term(t));
  std::sort(children.begin(), children.end());
  return ExprBuilder::make_composite(NodeKind::sum, std::move(children));
}

Poly normalize(const Poly& p) { return poly_add(p, {}); }

namespace {

// Factors whose presence in a term is not canonical: sums raised to a
// positive power (must be expanded) and sqrt(u)^e with |e| >= 2.
bool reducible(const Factor& f) {
  if (f.base.kind() == NodeKind::sum) return f.exp > 0;
  if (f.base.kind() == NodeKind::function && f.base.function() == Function::sqrt) {
    return f.exp >= 2 || f.exp <= -2;
  }
  return false;
}

Poly term_to_poly(Term t);

Poly poly_mul_term(const Poly& p, const Term& t);

Term merge_terms(const Term& a, const Term& b) {
  Term out;
  out.coeff = a.coeff * b.coeff;
  out.factors.reserve(a.factors.size() + b.factors.size());
  std::size_t i = 0, j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    if (j == b.factors.size() ||
        (i < a.factors.size() && (a.factors[i].base <=> b.factors[j].base) < 0)) {
      out.factors.push_back(a.factors[i++]);
    } else if (i == a.factors.size() || (b.factors[j].base <=> a.factors[i].base) < 0) {
      out.factors.push_back(b.factors[j++]);
    } else {
      int e = a.factors[i].exp + b.factors[j].exp;
      if (e != 0) out.factors.push_back({a.factors[i].base, e});
      ++i;
      ++j;
    }
  }
  return out;
}

Poly term_to_poly(Term t) {
  if (t.coeff == 0) return {};
  auto it = std::find_if(t.factors.begin(), t.factors.end(), reducible);
  if (it == t.factors.end()) return {t};
  Factor f = *it;
  t.factors.erase(it);
  Poly expansion;
  if (f.base.kind() == NodeKind::sum) {
    expansion = poly_pow(to_poly(f.base), f.exp);
  } else {
    // sqrt(u)^e = u^q * sqrt(u)^r with e = 2q + r, r in {0, 1}.
    int q = f.exp >= 0 ? f.exp / 2 : -((-f.exp + 1) / 2);
    int r = f.exp - 2 * q;
    expansion = poly_pow(to_poly(f.base.children()[0]), q);
    if (r != 0) expansion = poly_mul_term(expansion, Term{1, {{f.base, r}}});
  }
  return poly_mul_term(expansion, t);
}

Poly poly_mul_term(const Poly& p, const Term& t) {
  Poly acc;
  for (const auto& a : p) acc = poly_add(acc, term_to_poly(merge_terms(a, t)));
  return acc;
}

}  // namespace

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly acc;
  for (const auto& ta : a) {
    for (const auto& tb : b) acc = poly_add(acc, term_to_poly(merge_terms(ta, tb)));
  }
  return acc;
}

Poly poly_pow(const Poly& p, int e) {
  if (e == 0) return {Term{1, {}}};
  if (e > 0) {
    Poly result{Term{1, {}}};
    Poly base = p;
    unsigned u = static_cast<unsigned>(e);
    while (u) {
      if (u & 1u) result = poly_mul(result, base);
      u >>= 1u;
      if (u) base = poly_mul(base, base);
    }
    return result;
  }
  if (p.empty()) throw Error(ErrorCode::eval, "division by zero");
  if (p.size() == 1) {
    Term t;
    t.coeff = rational_pow(p.front().coeff, e);
    for (const auto& f : p.front().factors) t.factors.push_back({f.base, f.exp * e});
    // Negative exponents can reorder nothing; bases keep their order.
    return term_to_poly(std::move(t));
  }
  // Pull the leading coefficient out so that the sum base is unique.
  Expr sum = from_poly(normalize(p));
  Rational lead = to_term(sum.children().front()).coeff;
  Poly scaled;
  for (const auto& t : to_poly(sum)) scaled.push_back({t.coeff / lead, t.factors});
  Expr base = from_poly(normalize(scaled));
  return {Term{rational_pow(lead, e), {{base, e}}}};
}

// ---------------------------------------------------------------------------
// Expr

Expr::Expr() : Expr(zero_expr()) {}

Expr::Expr(long value) : Expr(ExprBuilder::make_constant(Rational(value))) {}

Expr Expr::constant(const Rational& value) { return ExprBuilder::make_constant(value); }

Expr Expr::coordinate(CoordId c) {
  if (c.level < 0 || c.index < 1) {
    throw Error(ErrorCode::coord_out_of_range, "invalid coordinate " + to_string(c));
  }
  return ExprBuilder::make_coordinate(c);
}

NodeKind Expr::kind() const noexcept { return node_->kind; }

const Rational& Expr::value() const {
  if (kind() != NodeKind::constant) throw Error(ErrorCode::precondition, "not a constant");
  return node_->value;
}

CoordId Expr::coord() const {
  if (kind() != NodeKind::coordinate) throw Error(ErrorCode::precondition, "not a coordinate");
  return node_->coord;
}

Function Expr::function() const {
  if (kind() != NodeKind::function) throw Error(ErrorCode::precondition, "not a function");
  return node_->fn;
}

int Expr::exponent() const {
  if (kind() != NodeKind::power) throw Error(ErrorCode::precondition, "not a power");
  return node_->exponent;
}

std::span<const Expr> Expr::children() const noexcept { return node_->children; }

bool Expr::is_zero() const noexcept { return kind() == NodeKind::constant && node_->value == 0; }
bool Expr::is_one() const noexcept { return kind() == NodeKind::constant && node_->value == 1; }

std::size_t Expr::hash() const noexcept { return node_->hash; }

bool Expr::may_depend_on(CoordId c) const noexcept { return (node_->vars & coord_bit(c)) != 0; }

bool operator==(const Expr& a, const Expr& b) noexcept {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return compare_nodes(*a.node_, *b.node_) == 0;
}

std::strong_ordering operator<=>(const Expr& a, const Expr& b) noexcept {
  return compare_nodes(*a.node_, *b.node_);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return from_poly(poly_add(to_poly(a), to_poly(b)));
}

Expr operator-(const Expr& a) {
  Poly p = to_poly(a);
  for (auto& t : p) t.coeff = -t.coeff;
  return from_poly(p);
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return from_poly(poly_mul(to_poly(a), to_poly(b)));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw Error(ErrorCode::eval, "division by zero");
  return a * pow(b, -1);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 1) return base;
  return from_poly(poly_pow(to_poly(base), exponent));
}

namespace {

bool exact_sqrt(const Rational& q, Rational& out) {
  if (q < 0) return false;
  mpz_class num = q.get_num(), den = q.get_den();
  mpz_class rn = sqrt(num), rd = sqrt(den);
  if (rn * rn != num || rd * rd != den) return false;
  out = Rational(rn, rd);
  out.canonicalize();
  return true;
}

}  // namespace

Expr Expr::apply(Function f, const Expr& arg) {
  if (arg.is_constant()) {
    const Rational& v = arg.value();
    switch (f) {
      case Function::sqrt: {
        Rational r;
        if (exact_sqrt(v, r)) return constant(r);
        break;
      }
      case Function::exp:
        if (v == 0) return Expr(1);
        break;
      case Function::log:
        if (v == 1) return Expr();
        break;
      case Function::sin:
        if (v == 0) return Expr();
        break;
      case Function::cos:
        if (v == 0) return Expr(1);
        break;
    }
  }
  return ExprBuilder::make_composite(NodeKind::function, {arg}, 0, f);
}

Expr sqrt(const Expr& e) { return Expr::apply(Function::sqrt, e); }
Expr exp(const Expr& e) { return Expr::apply(Function::exp, e); }
Expr log(const Expr& e) { return Expr::apply(Function::log, e); }
Expr sin(const Expr& e) { return Expr::apply(Function::sin, e); }
Expr cos(const Expr& e) { return Expr::apply(Function::cos, e); }

Expr canonicalize(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::constant:
      return Expr::constant(e.value());
    case NodeKind::coordinate:
      return Expr::coordinate(e.coord());
    case NodeKind::sum: {
      Expr acc;
      for (const auto& c : e.children()) acc = acc + canonicalize(c);
      return acc;
    }
    case NodeKind::product: {
      Expr acc(1);
      for (const auto& c : e.children()) acc = acc * canonicalize(c);
      return acc;
    }
    case NodeKind::power:
      return pow(canonicalize(e.children()[0]), e.exponent());
    case NodeKind::function:
      return Expr::apply(e.function(), canonicalize(e.children()[0]));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Calculus and structure queries

Expr differentiate(const Expr& e, CoordId v) {
  if (!e.may_depend_on(v)) return Expr();
  switch (e.kind()) {
    case NodeKind::constant:
      return Expr();
    case NodeKind::coordinate:
      return e.coord() == v ? Expr(1) : Expr();
    case NodeKind::sum: {
      Poly acc;
      for (const auto& c : e.children()) acc = poly_add(acc, to_poly(differentiate(c, v)));
      return from_poly(acc);
    }
    case NodeKind::function: {
      const Expr& u = e.children()[0];
      Expr du = differentiate(u, v);
      if (du.is_zero()) return Expr();
      switch (e.function()) {
        case Function::sqrt: return du * Expr::constant(Rational(1, 2)) * pow(e, -1);
        case Function::exp: return du * e;
        case Function::log: return du * pow(u, -1);
        case Function::sin: return du * cos(u);
        case Function::cos: return -(du * sin(u));
      }
      return Expr();
    }
    case NodeKind::product:
    case NodeKind::power: {
      Term t = to_term(e);
      Poly acc;
      for (std::size_t i = 0; i < t.factors.size(); ++i) {
        const Factor& f = t.factors[i];
        Expr db = differentiate(f.base, v);
        if (db.is_zero()) continue;
        Term rest{t.coeff * f.exp, {}};
        for (std::size_t j = 0; j < t.factors.size(); ++j) {
          if (j == i) {
            if (f.exp != 1) rest.factors.push_back({f.base, f.exp - 1});
          } else {
            rest.factors.push_back(t.factors[j]);
          }
        }
        acc = poly_add(acc, poly_mul_term(to_poly(db), rest));
      }
      return from_poly(acc);
    }
  }
  return Expr();
}

bool depends_on(const Expr& e, CoordId c) {
  if (!e.may_depend_on(c)) return false;
  if (e.kind() == NodeKind::coordinate) return e.coord() == c;
  for (const auto& child : e.children()) {
    if (depends_on(child, c)) return true;
  }
  return false;
}

int max_level(const Expr& e) { return e.node()->max_level; }

namespace {

void collect(const Expr& e, std::vector<CoordId>& out) {
  if (e.kind() == NodeKind::coordinate) {
    out.push_back(e.coord());
    return;
  }
  for (const auto& c : e.children()) collect(c, out);
}

}  // namespace

std::vector<CoordId> coordinates(const Expr& e) {
  std::vector<CoordId> out;
  collect(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Expr substitute(const Expr& e, const std::map<CoordId, Expr>& bindings, const Context& ctx) {
  for (const auto& [c, _] : bindings) {
    if (!ctx.contains(c)) {
      throw Error(ErrorCode::coord_out_of_range, "binding key " + to_string(c) + " outside context");
    }
  }
  std::function<Expr(const Expr&)> rec = [&](const Expr& x) -> Expr {
    switch (x.kind()) {
      case NodeKind::constant:
        return x;
      case NodeKind::coordinate: {
        auto it = bindings.find(x.coord());
        return it == bindings.end() ? x : it->second;
      }
      case NodeKind::sum: {
        Expr acc;
        for (const auto& c : x.children()) acc = acc + rec(c);
        return acc;
      }
      case NodeKind::product: {
        Expr acc(1);
        for (const auto& c : x.children()) acc = acc * rec(c);
        return acc;
      }
      case NodeKind::power:
        return pow(rec(x.children()[0]), x.exponent());
      case NodeKind::function:
        return Expr::apply(x.function(), rec(x.children()[0]));
    }
    return x;
  };
  return rec(e);
}

}  // namespace kjet
