#include "kjet/lagrange_finsler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kjet {

namespace {

// Signs of the leading minors, 0 for a vanishing minor; the full
// determinant vanishing marks the point degenerate.
std::vector<int> sign_pattern(const std::vector<double>& minors, double threshold, bool& degenerate) {
  std::vector<int> out;
  for (double v : minors) out.push_back(std::abs(v) <= threshold ? 0 : (v > 0 ? 1 : -1));
  degenerate = out.empty() || out.back() == 0;
  return out;
}

std::string pattern_str(const std::vector<int>& pattern) {
  std::string s;
  for (int v : pattern) s += v > 0 ? '+' : (v < 0 ? '-' : '0');
  return s;
}

}  // namespace

MetricTensor metric_tensor(const LagrangianSpec& spec) {
  const Context& ctx = spec.ctx;
  const int n = ctx.n(), k = ctx.k();
  MetricTensor m{ctx, ExprMatrix(n, n), std::nullopt};
  const Expr half = Expr::constant(Rational(1, 2));
  for (int i = 0; i < n; ++i) {
    Expr di = differentiate(spec.L, {k, i + 1});
    for (int j = 0; j < n; ++j) m.g(i, j) = half * differentiate(di, {k, j + 1});
  }
  if (n <= kSymbolicInverseMaxDim && !determinant(m.g).is_zero()) m.g_inv = symbolic_inverse(m.g);
  return m;
}

CheckReport regularity_check(const MetricTensor& m, std::span<const PhasePoint> samples, double threshold) {
  CheckReport report("metric_regularity", threshold);
  double smallest = std::numeric_limits<double>::infinity();
  bool positive = false, negative = false;
  for (const auto& p : samples) {
    double det = m.g.evaluate(p).determinant();
    positive = positive || det > 0;
    negative = negative || det < 0;
    if (std::abs(det) < smallest) {
      smallest = std::abs(det);
      report.worst_point = p;
    }
  }
  report.max_residual = samples.empty() ? 0.0 : smallest;
  // det g is continuous on the box, so a sign change means it vanishes
  // between samples.
  const bool sign_change = positive && negative;
  report.passed = samples.empty() || (smallest > threshold && !sign_change);
  std::ostringstream os;
  os << "min |det g| = " << report.max_residual;
  if (sign_change) os << "; det g changes sign across the domain";
  report.detail = os.str();
  return report;
}

CheckReport signature_check(const MetricTensor& m, std::span<const PhasePoint> samples) {
  CheckReport report("lagrange_signature", 0.0);
  std::vector<int> reference;
  int deviating = 0;
  bool degenerate_seen = false;
  for (const auto& p : samples) {
    bool degenerate = false;
    auto pattern = sign_pattern(leading_minors(m.g.evaluate(p)), kRegularityThreshold, degenerate);
    if (reference.empty()) reference = pattern;
    if (degenerate || pattern != reference) {
      ++deviating;
      degenerate_seen = degenerate_seen || degenerate;
      if (!report.worst_point) report.worst_point = p;
    }
  }
  if (!report.worst_point && !samples.empty()) report.worst_point = samples.front();
  report.max_residual = samples.empty() ? 0.0 : static_cast<double>(deviating) / static_cast<double>(samples.size());
  report.passed = deviating == 0;
  report.detail = "leading minor signs " + pattern_str(reference);
  if (degenerate_seen) report.detail += "; degenerate minors present";
  return report;
}

std::vector<Expr> euler_lagrange_bracket(const LagrangianSpec& spec) {
  const Context& ctx = spec.ctx;
  VectorField gamma = gamma_operator(ctx);
  std::vector<Expr> b;
  for (int j = 1; j <= ctx.n(); ++j) {
    b.push_back(lie_apply(gamma, differentiate(spec.L, {ctx.k(), j})) - differentiate(spec.L, {ctx.k() - 1, j}));
  }
  return b;
}

KSemispray canonical_semispray(const LagrangianSpec& spec) {
  const Context& ctx = spec.ctx;
  const int n = ctx.n();
  if (n > kSymbolicInverseMaxDim) {
    throw Error(ErrorCode::precondition, "symbolic canonical semispray needs n <= 3; evaluate per point instead");
  }
  MetricTensor m = metric_tensor(spec);
  if (!m.g_inv) throw Error(ErrorCode::singular_metric, "metric determinant is identically zero");
  auto b = euler_lagrange_bracket(spec);
  const Expr scale = Expr::constant(Rational(1, 2 * (ctx.k() + 1)));
  std::vector<Expr> g;
  for (int i = 0; i < n; ++i) {
    Expr acc;
    for (int j = 0; j < n; ++j) acc += (*m.g_inv)(i, j) * b[static_cast<std::size_t>(j)];
    g.push_back(scale * acc);
  }
  return KSemispray(ctx, std::move(g));
}

CanonicalSemisprayEvaluator::CanonicalSemisprayEvaluator(const LagrangianSpec& spec)
    : ctx_(spec.ctx), g_(metric_tensor(spec).g), bracket_(euler_lagrange_bracket(spec)) {}

std::vector<double> CanonicalSemisprayEvaluator::operator()(const PhasePoint& p) const {
  const int n = ctx_.n();
  Eigen::MatrixXd g = g_.evaluate(p);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(g);
  double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot >= kPivotThreshold)) {
    throw Error(ErrorCode::singular_metric, "metric is singular at " + p.str());
  }
  Eigen::VectorXd b(n);
  for (int j = 0; j < n; ++j) b(j) = evaluate(bracket_[static_cast<std::size_t>(j)], p);
  Eigen::VectorXd sol = lu.solve(b) / (2.0 * (ctx_.k() + 1));
  return {sol.data(), sol.data() + n};
}

CheckReport finsler_check(const LagrangianSpec& spec, std::span<const PhasePoint> samples) {
  const Context& ctx = spec.ctx;
  CheckReport report("finsler_axioms", 1e-9);
  if (!spec.finsler) {
    report.passed = false;
    report.detail = "problem is not declared Finsler";
    return report;
  }
  MetricTensor m = metric_tensor(spec);
  bool positive = true, definite = true;
  std::optional<PhasePoint> first_bad;
  for (const auto& p : samples) {
    bool ok = true;
    if (!(evaluate(spec.L, p) > 0.0)) positive = ok = false;
    for (double minor : leading_minors(m.g.evaluate(p))) {
      if (!(minor > 0.0)) definite = ok = false;
    }
    if (!ok && !first_bad) first_bad = p;
  }
  CheckReport euler = euler_degree(spec.L, 2 * ctx.k(), ctx, samples, report.tolerance);
  report.max_residual = euler.max_residual;
  report.worst_point = first_bad ? first_bad : euler.worst_point;
  report.passed = positive && definite && euler.passed;
  std::string failed;
  auto add = [&](bool ok, const char* what) {
    if (ok) return;
    if (!failed.empty()) failed += ", ";
    failed += what;
  };
  add(positive, "positivity");
  add(euler.passed, "2k-homogeneity");
  add(definite, "positive definiteness");
  report.detail = failed.empty() ? "all Finsler conditions hold" : "violated: " + failed;
  return report;
}

DualCoefficients cartan_connection(const LagrangianSpec& spec, std::span<const PhasePoint> samples) {
  CheckReport check = finsler_check(spec, samples);
  if (!check.passed) throw Error(ErrorCode::finsler_axiom_violation, check.detail);
  return miron_connection(canonical_semispray(spec));
}

ExprMatrix cartan_level_one(const LagrangianSpec& spec) {
  const Context& ctx = spec.ctx;
  const int n = ctx.n(), k = ctx.k();
  MetricTensor m = metric_tensor(spec);
  if (!m.g_inv) throw Error(ErrorCode::singular_metric, "metric determinant is identically zero");
  const ExprMatrix& ginv = *m.g_inv;
  auto b = euler_lagrange_bracket(spec);
  const Expr scale = Expr::constant(Rational(1, 2 * (k + 1)));
  ExprMatrix out(n, n);
  for (int j = 0; j < n; ++j) {
    CoordId v{k, j + 1};
    ExprMatrix dg(n, n);
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < n; ++c) dg(a, c) = differentiate(m.g(a, c), v);
    }
    // d(g^-1) = -g^-1 dg g^-1
    ExprMatrix dginv = Expr(-1) * (ginv * dg * ginv);
    for (int i = 0; i < n; ++i) {
      Expr acc;
      for (int h = 0; h < n; ++h) {
        acc += dginv(i, h) * b[static_cast<std::size_t>(h)] + ginv(i, h) * differentiate(b[static_cast<std::size_t>(h)], v);
      }
      out(i, j) = scale * acc;
    }
  }
  return out;
}

}  // namespace kjet
