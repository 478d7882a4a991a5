#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kjet/point.hpp"

namespace kjet {

/// Dense matrix of expressions, row-major; entry (i, j) holds the
/// coefficient with upper index i and lower index j.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  static ExprMatrix identity(int n);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  Expr& operator()(int i, int j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  const Expr& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  bool is_zero() const;
  ExprMatrix transposed() const;
  Eigen::MatrixXd evaluate(const PhasePoint& p) const;

  friend ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b);
  friend ExprMatrix operator*(const Expr& s, const ExprMatrix& a);
  friend bool operator==(const ExprMatrix&, const ExprMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> data_;
};

/// Cofactor-expansion determinant. Intended for n <= 3.
Expr determinant(const ExprMatrix& m);
ExprMatrix adjugate(const ExprMatrix& m);

/// adj(m) / det(m). Throws Error(on_singular) when det(m) is the zero
/// expression.
ExprMatrix symbolic_inverse(const ExprMatrix& m, ErrorCode on_singular = ErrorCode::singular_metric);

/// Leading principal minors of a numeric square matrix.
std::vector<double> leading_minors(const Eigen::MatrixXd& m);

}  // namespace kjet
