#include "kjet/linalg.hpp"

namespace kjet {

ExprMatrix ExprMatrix::identity(int n) {
  ExprMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Expr(1);
  return m;
}

bool ExprMatrix::is_zero() const {
  for (const auto& e : data_) {
    if (!e.is_zero()) return false;
  }
  return true;
}

ExprMatrix ExprMatrix::transposed() const {
  ExprMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Eigen::MatrixXd ExprMatrix::evaluate(const PhasePoint& p) const {
  Eigen::MatrixXd out(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out(i, j) = kjet::evaluate((*this)(i, j), p);
  }
  return out;
}

namespace {

void require_same_shape(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::shape_mismatch, "matrix shapes differ");
  }
}

}  // namespace

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
  require_same_shape(a, b);
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  }
  return out;
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
  require_same_shape(a, b);
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  }
  return out;
}

ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::shape_mismatch, "matrix product shapes");
  ExprMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < b.cols(); ++j) {
      Expr acc;
      for (int r = 0; r < a.cols(); ++r) {
        if (a(i, r).is_zero() || b(r, j).is_zero()) continue;
        acc += a(i, r) * b(r, j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

ExprMatrix operator*(const Expr& s, const ExprMatrix& a) {
  ExprMatrix out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  }
  return out;
}

namespace {

ExprMatrix minor_matrix(const ExprMatrix& m, int row, int col) {
  ExprMatrix out(m.rows() - 1, m.cols() - 1);
  for (int i = 0, oi = 0; i < m.rows(); ++i) {
    if (i == row) continue;
    for (int j = 0, oj = 0; j < m.cols(); ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

}  // namespace

Expr determinant(const ExprMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::shape_mismatch, "determinant of non-square matrix");
  const int n = m.rows();
  if (n == 0) return Expr(1);
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Expr acc;
  for (int j = 0; j < n; ++j) {
    if (m(0, j).is_zero()) continue;
    Expr term = m(0, j) * determinant(minor_matrix(m, 0, j));
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

ExprMatrix adjugate(const ExprMatrix& m) {
  const int n = m.rows();
  ExprMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = Expr(1);
    return adj;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Expr cof = determinant(minor_matrix(m, i, j));
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

ExprMatrix symbolic_inverse(const ExprMatrix& m, ErrorCode on_singular) {
  Expr det = determinant(m);
  if (det.is_zero()) throw Error(on_singular, "determinant is identically zero");
  return pow(det, -1) * adjugate(m);
}

std::vector<double> leading_minors(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  for (Eigen::Index s = 1; s <= m.rows(); ++s) out.push_back(m.topLeftCorner(s, s).determinant());
  return out;
}

}  // namespace kjet
