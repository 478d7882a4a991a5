#include <cctype>
#include <string>

#include "kjet/expr.hpp"

namespace kjet {

namespace {

// Recursive descent over
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)?
//   primary := number | x(i) | y(m,i) | fn '(' sum ')' | '(' sum ')'
class Parser {
 public:
  Parser(std::string_view text, const Context& ctx) : text_(text), ctx_(ctx) {}

  Expr parse() {
    Expr e = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr sum() {
    Expr acc = product();
    for (;;) {
      if (accept('+')) {
        acc = acc + product();
      } else if (accept('-')) {
        acc = acc - product();
      } else {
        return acc;
      }
    }
  }

  Expr product() {
    Expr acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        acc = acc * unary(true);
      } else {
        return acc;
      }
    }
  }

  // With reciprocal set the operand is a divisor: a / b^n reads as
  // a * b^(-n), so a power of a sum is never expanded before inversion.
  Expr unary(bool reciprocal = false) {
    if (accept('-')) return -unary(reciprocal);
    if (accept('+')) return unary(reciprocal);
    return power(reciprocal);
  }

  Expr power(bool reciprocal) {
    skip_ws();
    std::size_t at = pos_;
    Expr base = primary();
    int e = 1;
    if (accept('^')) {
      e = integer_exponent();
      if (peek() == '^') fail("chained '^' is not supported; parenthesize");
    }
    if (reciprocal) e = -e;
    if (e < 0 && base.is_zero()) {
      throw SyntaxError(at, reciprocal ? "division by constant zero" : "zero raised to a negative power");
    }
    return pow(base, e);
  }

  int integer_exponent() {
    bool paren = accept('(');
    bool negative = false;
    if (accept('-')) {
      negative = true;
    } else {
      accept('+');
    }
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer exponent");
    long v = std::stol(std::string(text_.substr(start, pos_ - start)));
    if (v > 1000) fail("exponent too large");
    if (paren) expect(')');
    return static_cast<int>(negative ? -v : v);
  }

  long integer_argument() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    if (pos_ - start > 9) fail("integer too large");
    return std::stol(std::string(text_.substr(start, pos_ - start)));
  }

  Expr number() {
    std::size_t start = pos_;
    mpz_class digits = 0;
    int scale = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      digits = digits * 10 + (text_[pos_++] - '0');
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        digits = digits * 10 + (text_[pos_++] - '0');
        --scale;
      }
    }
    if (pos_ == start || (pos_ == start + 1 && text_[start] == '.')) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      bool neg = false;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) neg = text_[pos_++] == '-';
      std::size_t es = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (es == pos_ || pos_ - es > 4) fail("malformed exponent");
      int ev = std::stoi(std::string(text_.substr(es, pos_ - es)));
      scale += neg ? -ev : ev;
    }
    Rational q(digits);
    mpz_class ten = 10;
    mpz_class scale_factor;
    mpz_pow_ui(scale_factor.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(scale < 0 ? -scale : scale));
    if (scale < 0) {
      q /= Rational(scale_factor);
    } else {
      q *= Rational(scale_factor);
    }
    q.canonicalize();
    return Expr::constant(q);
  }

  Expr coordinate(bool is_y, std::size_t at) {
    expect('(');
    long level = 0;
    if (is_y) {
      level = integer_argument();
      expect(',');
    }
    long index = integer_argument();
    expect(')');
    CoordId c{static_cast<int>(level), static_cast<int>(index)};
    if ((is_y && level < 1) || !ctx_.contains(c)) {
      throw Error(ErrorCode::coord_out_of_range,
                  to_string(c) + " outside context n=" + std::to_string(ctx_.n()) +
                      " k=" + std::to_string(ctx_.k()) + " at position " + std::to_string(at));
    }
    return Expr::coordinate(c);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expr e = sum();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      std::string_view word = text_.substr(start, pos_ - start);
      if (word == "x") return coordinate(false, start);
      if (word == "y") return coordinate(true, start);
      static constexpr std::pair<std::string_view, Function> kFunctions[] = {
          {"sqrt", Function::sqrt}, {"exp", Function::exp}, {"log", Function::log},
          {"sin", Function::sin},   {"cos", Function::cos},
      };
      for (const auto& [name, fn] : kFunctions) {
        if (word == name) {
          expect('(');
          Expr arg = sum();
          expect(')');
          return Expr::apply(fn, arg);
        }
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(word) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const Context& ctx_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const Context& ctx) { return Parser(text, ctx).parse(); }

}  // namespace kjet
