#include "kjet/connections.hpp"

#include <algorithm>
#include <cmath>

namespace kjet {

namespace {

ExprMatrix map_entries(const ExprMatrix& m, const auto& fn) {
  ExprMatrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out(i, j) = fn(m(i, j));
  }
  return out;
}

void validate_levels(const Context& ctx, const std::vector<ExprMatrix>& levels, const char* what) {
  if (levels.size() != static_cast<std::size_t>(ctx.k())) {
    throw Error(ErrorCode::shape_mismatch, std::string(what) + " need " + std::to_string(ctx.k()) + " levels");
  }
  for (const auto& m : levels) {
    if (m.rows() != ctx.n() || m.cols() != ctx.n()) {
      throw Error(ErrorCode::shape_mismatch, std::string(what) + " must be n x n");
    }
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        for (CoordId c : coordinates(m(i, j))) {
          if (!ctx.contains(c)) throw Error(ErrorCode::coord_out_of_range, std::string(what) + " use " + to_string(c));
        }
      }
    }
  }
}

// D(r, c) = d u~_r / d u_c over the natural frame.
ExprMatrix prolonged_jacobian(const ChartMap& chart) {
  const Context& ctx = chart.context();
  auto tilde = prolonged_coordinates(chart);
  ExprMatrix d(ctx.dim(), ctx.dim());
  for (int r = 0; r < ctx.dim(); ++r) {
    for (int c = 0; c < ctx.dim(); ++c) d(r, c) = differentiate(tilde[static_cast<std::size_t>(r)], ctx.coord_at(c));
  }
  return d;
}

ExprMatrix block(const ExprMatrix& m, int n, int r, int c) {
  ExprMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = m(r * n + i, c * n + j);
  }
  return out;
}

Eigen::MatrixXd numeric_block(const Eigen::MatrixXd& m, int n, int r, int c) { return m.block(r * n, c * n, n, n); }

}  // namespace

void validate(const DualCoefficients& d) { validate_levels(d.ctx, d.M, "dual coefficients"); }
void validate(const PrimalCoefficients& p) { validate_levels(p.ctx, p.N, "primal coefficients"); }

DualCoefficients miron_connection(const KSemispray& s) {
  const Context& ctx = s.context();
  const int n = ctx.n(), k = ctx.k();
  VectorField field = assemble_field(s);
  DualCoefficients d{ctx, {}};
  ExprMatrix first(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) first(i, j) = differentiate(s.coefficient(i + 1), {k, j + 1});
  }
  d.M.push_back(first);
  for (int m = 2; m <= k; ++m) {
    const ExprMatrix& prev = d.M.back();
    ExprMatrix along = map_entries(prev, [&](const Expr& e) { return lie_apply(field, e); });
    d.M.push_back(Expr::constant(Rational(1, m)) * (along + first * prev));
  }
  return d;
}

DualCoefficients bucataru_connection(const KSemispray& s) {
  const Context& ctx = s.context();
  const int n = ctx.n(), k = ctx.k();
  DualCoefficients d{ctx, {}};
  for (int m = 1; m <= k; ++m) {
    ExprMatrix mat(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) mat(i, j) = differentiate(s.coefficient(i + 1), {k - m + 1, j + 1});
    }
    d.M.push_back(std::move(mat));
  }
  return d;
}

DualCoefficients make_connection(const KSemispray& s, ConnectionKind kind) {
  return kind == ConnectionKind::miron ? miron_connection(s) : bucataru_connection(s);
}

PrimalCoefficients dual_to_primal(const DualCoefficients& d) {
  validate(d);
  PrimalCoefficients p{d.ctx, {}};
  for (int m = 1; m <= d.ctx.k(); ++m) {
    ExprMatrix acc = d.level(m);
    for (int a = 1; a < m; ++a) acc = acc - p.level(m - a) * d.level(a);
    p.N.push_back(std::move(acc));
  }
  return p;
}

DualCoefficients primal_to_dual(const PrimalCoefficients& p) {
  validate(p);
  DualCoefficients d{p.ctx, {}};
  for (int m = 1; m <= p.ctx.k(); ++m) {
    ExprMatrix acc = p.level(m);
    for (int a = 1; a < m; ++a) acc = acc + p.level(m - a) * d.level(a);
    d.M.push_back(std::move(acc));
  }
  return d;
}

ExprMatrix AdaptedFrame::basis_matrix() const {
  const int dim = ctx.dim();
  ExprMatrix out(dim, dim);
  for (int b = 0; b < dim; ++b) {
    for (int r = 0; r < dim; ++r) out(r, b) = basis[static_cast<std::size_t>(b)].components()[static_cast<std::size_t>(r)];
  }
  return out;
}

AdaptedFrame adapted_frame(const DualCoefficients& d) {
  PrimalCoefficients p = dual_to_primal(d);
  const Context& ctx = d.ctx;
  const int n = ctx.n(), k = ctx.k(), dim = ctx.dim();
  AdaptedFrame frame{ctx, {}, ExprMatrix(dim, dim)};
  for (int c = 0; c <= k; ++c) {
    for (int j = 0; j < n; ++j) {
      std::vector<Expr> comp(static_cast<std::size_t>(dim));
      comp[static_cast<std::size_t>(c * n + j)] = Expr(1);
      for (int r = c + 1; r <= k; ++r) {
        for (int i = 0; i < n; ++i) comp[static_cast<std::size_t>(r * n + i)] = -p.level(r - c)(i, j);
      }
      frame.basis.emplace_back(ctx, std::move(comp));
    }
  }
  for (int r = 0; r <= k; ++r) {
    for (int i = 0; i < n; ++i) {
      frame.cobasis(r * n + i, r * n + i) = Expr(1);
      for (int c = 0; c < r; ++c) {
        for (int j = 0; j < n; ++j) frame.cobasis(r * n + i, c * n + j) = d.level(r - c)(i, j);
      }
    }
  }
  return frame;
}

CheckReport verify_frame_duality(const AdaptedFrame& frame, std::span<const PhasePoint> samples, double tolerance) {
  CheckReport report("frame_duality", tolerance);
  ExprMatrix b = frame.basis_matrix();
  const int dim = frame.ctx.dim();
  for (const auto& p : samples) {
    Eigen::MatrixXd pairing = frame.cobasis.evaluate(p) * b.evaluate(p);
    double worst = (pairing - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    report.record(worst, p);
  }
  return report.settle();
}

TransformedCoefficients transform_connection_at(const DualCoefficients& d, const ChartMap& chart,
                                                const PhasePoint& p) {
  const Context& ctx = d.ctx;
  if (!(chart.context() == ctx)) throw Error(ErrorCode::shape_mismatch, "chart context differs");
  const int n = ctx.n(), k = ctx.k();
  Eigen::MatrixXd j = chart.jacobian_at(p);
  Eigen::MatrixXd jinv = j.inverse();
  auto tilde = prolong_chart(chart);
  std::vector<Eigen::MatrixXd> dy;  // dy[a-1](i, j) = d y~(a,i) / d x^j
  for (int a = 1; a <= k; ++a) {
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        m(r, c) = evaluate(differentiate(tilde[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(r)], {0, c + 1}), p);
      }
    }
    dy.push_back(std::move(m));
  }
  PrimalCoefficients primal = dual_to_primal(d);
  TransformedCoefficients out;
  for (int m = 1; m <= k; ++m) {
    Eigen::MatrixXd rhs = j * d.level(m).evaluate(p) - dy[static_cast<std::size_t>(m - 1)];
    for (int a = 1; a < m; ++a) rhs -= out.dual[static_cast<std::size_t>(m - a - 1)] * dy[static_cast<std::size_t>(a - 1)];
    out.dual.push_back(rhs * jinv);

    Eigen::MatrixXd prhs = j * primal.level(m).evaluate(p) - dy[static_cast<std::size_t>(m - 1)];
    for (int a = 1; a < m; ++a) prhs += dy[static_cast<std::size_t>(a - 1)] * primal.level(m - a).evaluate(p);
    out.primal.push_back(prhs * jinv);
  }
  return out;
}

CheckReport verify_coefficient_transformation(const DualCoefficients& d, const ChartMap& chart,
                                              std::span<const PhasePoint> samples, double tolerance) {
  const Context& ctx = d.ctx;
  const int n = ctx.n(), k = ctx.k(), dim = ctx.dim();
  CheckReport report("coefficient_transformation", tolerance);
  AdaptedFrame frame = adapted_frame(d);
  ExprMatrix basis = frame.basis_matrix();
  ExprMatrix jet = prolonged_jacobian(chart);

  for (const auto& p : samples) {
    TransformedCoefficients t = transform_connection_at(d, chart, p);
    Eigen::MatrixXd dmat = jet.evaluate(p);
    Eigen::MatrixXd e = dmat.inverse();
    Eigen::MatrixXd j = numeric_block(dmat, n, 0, 0);
    Eigen::MatrixXd jinv = j.inverse();
    Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd lift_inv = Eigen::MatrixXd::Zero(dim, dim);
    for (int l = 0; l <= k; ++l) {
      lift.block(l * n, l * n, n, n) = j;
      lift_inv.block(l * n, l * n, n, n) = jinv;
    }
    // The adapted coframe of a d-tensor transforms with J on every level.
    Eigen::MatrixXd cobasis = lift * frame.cobasis.evaluate(p) * e;
    // The adapted frame transforms with J^-1, pushed through the chart.
    Eigen::MatrixXd frame_t = dmat * basis.evaluate(p) * lift_inv;

    double worst = 0.0;
    for (int r = 0; r <= k; ++r) {
      for (int c = 0; c <= k; ++c) {
        Eigen::MatrixXd want_co = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd want_fr = Eigen::MatrixXd::Zero(n, n);
        if (r == c) {
          want_co.setIdentity();
          want_fr.setIdentity();
        } else if (c < r) {
          want_co = t.dual[static_cast<std::size_t>(r - c - 1)];
          want_fr = -t.primal[static_cast<std::size_t>(r - c - 1)];
        }
        worst = std::max(worst, (numeric_block(cobasis, n, r, c) - want_co).cwiseAbs().maxCoeff());
        worst = std::max(worst, (numeric_block(frame_t, n, r, c) - want_fr).cwiseAbs().maxCoeff());
      }
    }
    report.record(worst, p);
  }
  return report.settle();
}

CheckReport verify_connection_covariance(const KSemispray& s, const ChartMap& chart, ConnectionKind kind,
                                         std::span<const PhasePoint> samples, double tolerance) {
  const Context& ctx = s.context();
  const int n = ctx.n(), k = ctx.k();
  CheckReport report(kind == ConnectionKind::miron ? "miron_covariance" : "bucataru_covariance", tolerance);

  ExprMatrix jet = prolonged_jacobian(chart);
  // Inverse of the block lower triangular prolonged Jacobian, built by
  // forward substitution from the inverse of its diagonal block J.
  ExprMatrix jinv = symbolic_inverse(block(jet, n, 0, 0), ErrorCode::singular_jacobian);
  std::vector<std::vector<ExprMatrix>> inv(static_cast<std::size_t>(k + 1),
                                           std::vector<ExprMatrix>(static_cast<std::size_t>(k + 1), ExprMatrix(n, n)));
  for (int q = 0; q <= k; ++q) {
    inv[static_cast<std::size_t>(q)][static_cast<std::size_t>(q)] = jinv;
    for (int r = q + 1; r <= k; ++r) {
      ExprMatrix acc(n, n);
      for (int m = q; m < r; ++m) acc = acc + block(jet, n, r, m) * inv[static_cast<std::size_t>(m)][static_cast<std::size_t>(q)];
      inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)] = Expr(-1) * (jinv * acc);
    }
  }
  // d f / d y~(level, j) via the chain rule through the inverse jet.
  auto tilde_partial = [&](const Expr& f, int level, int j) {
    Expr acc;
    for (int b = level; b <= k; ++b) {
      for (int i = 0; i < n; ++i) {
        const Expr& w = inv[static_cast<std::size_t>(b)][static_cast<std::size_t>(level)](i, j);
        if (w.is_zero()) continue;
        acc += differentiate(f, {b, i + 1}) * w;
      }
    }
    return acc;
  };

  std::vector<Expr> tilde_g = transform_coefficients(s, chart);
  std::vector<ExprMatrix> rebuilt;
  if (kind == ConnectionKind::bucataru) {
    for (int m = 1; m <= k; ++m) {
      ExprMatrix mat(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) mat(i, j) = tilde_partial(tilde_g[static_cast<std::size_t>(i)], k - m + 1, j);
      }
      rebuilt.push_back(std::move(mat));
    }
  } else {
    VectorField field = assemble_field(s);
    ExprMatrix first(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) first(i, j) = tilde_partial(tilde_g[static_cast<std::size_t>(i)], k, j);
    }
    rebuilt.push_back(first);
    for (int m = 2; m <= k; ++m) {
      const ExprMatrix& prev = rebuilt.back();
      ExprMatrix along = map_entries(prev, [&](const Expr& e) { return lie_apply(field, e); });
      rebuilt.push_back(Expr::constant(Rational(1, m)) * (along + first * prev));
    }
  }

  DualCoefficients original = make_connection(s, kind);
  for (const auto& p : samples) {
    TransformedCoefficients t = transform_connection_at(original, chart, p);
    double worst = 0.0;
    for (int m = 0; m < k; ++m) {
      Eigen::MatrixXd diff = rebuilt[static_cast<std::size_t>(m)].evaluate(p) - t.dual[static_cast<std::size_t>(m)];
      worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    report.record(worst, p);
  }
  return report.settle();
}

CheckReport verify_coefficient_homogeneity(const DualCoefficients& d, std::span<const PhasePoint> samples,
                                           double tolerance) {
  CheckReport report("coefficient_homogeneity", tolerance);
  PrimalCoefficients p = dual_to_primal(d);
  std::string failing;
  for (int m = 1; m <= d.ctx.k(); ++m) {
    for (const ExprMatrix* mat : {&d.level(m), &p.level(m)}) {
      for (int i = 0; i < d.ctx.n(); ++i) {
        for (int j = 0; j < d.ctx.n(); ++j) {
          CheckReport r = euler_degree((*mat)(i, j), m, d.ctx, samples, tolerance);
          if (!r.passed && failing.empty()) {
            failing = std::string(mat == &d.level(m) ? "M" : "N") + "(" + std::to_string(m) + ")^" +
                      std::to_string(i + 1) + "_" + std::to_string(j + 1) + " is not of degree " + std::to_string(m);
          }
          r.detail.clear();
          report.merge(r);
        }
      }
    }
  }
  report.detail = failing;
  return report.settle();
}

OdeSystem autoparallel_rhs(const DualCoefficients& d, AutoparallelForm form) {
  validate(d);
  const Context& ctx = d.ctx;
  const int n = ctx.n(), k = ctx.k();
  // rates[l][i] = d(level l, i)/dt
  std::vector<std::vector<Expr>> rates(static_cast<std::size_t>(k + 1), std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) rates[0][static_cast<std::size_t>(i)] = Expr::y(1, i + 1);
  auto chain_row = [&](int m) {
    std::vector<Expr> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Expr acc;
      for (int a = 1; a <= m; ++a) {
        for (int j = 0; j < n; ++j) acc -= d.level(a)(i, j) * rates[static_cast<std::size_t>(m - a)][static_cast<std::size_t>(j)];
      }
      row[static_cast<std::size_t>(i)] = acc;
    }
    return row;
  };
  for (int m = 1; m <= k; ++m) {
    if (form == AutoparallelForm::k_extension && m < k) {
      for (int i = 0; i < n; ++i) rates[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] = Expr(m + 1) * Expr::y(m + 1, i + 1);
    } else {
      rates[static_cast<std::size_t>(m)] = chain_row(m);
    }
  }
  std::vector<Expr> rhs;
  rhs.reserve(static_cast<std::size_t>(ctx.dim()));
  for (const auto& level : rates) rhs.insert(rhs.end(), level.begin(), level.end());
  return OdeSystem(ctx, std::move(rhs));
}

double horizontality_residual(const Trajectory& trajectory, const DualCoefficients& d) {
  const Context& ctx = d.ctx;
  const int n = ctx.n(), k = ctx.k();
  const auto& st = trajectory.states;
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < st.size(); ++s) {
    const double dt = trajectory.times[s + 1] - trajectory.times[s - 1];
    auto before = st[s - 1].flat();
    auto after = st[s + 1].flat();
    Eigen::VectorXd rate(ctx.dim());
    for (int c = 0; c < ctx.dim(); ++c) rate(c) = (after[static_cast<std::size_t>(c)] - before[static_cast<std::size_t>(c)]) / dt;
    for (int m = 1; m <= k; ++m) {
      Eigen::VectorXd row = rate.segment(m * n, n);
      for (int a = 1; a <= m; ++a) row += d.level(a).evaluate(st[s]) * rate.segment((m - a) * n, n);
      worst = std::max(worst, row.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace kjet
