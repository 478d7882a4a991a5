#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kjet/check.hpp"
#include "kjet/integrator.hpp"
#include "kjet/linalg.hpp"
#include "kjet/phase_space.hpp"
#include "kjet/semispray.hpp"

namespace kjet {

/// Dual coefficients M(m)^i_j, m = 1..k; M[m-1](i-1, j-1) = M(m)^i_j.
struct DualCoefficients {
  Context ctx{1, 1};
  std::vector<ExprMatrix> M;

  const ExprMatrix& level(int m) const { return M.at(static_cast<std::size_t>(m - 1)); }
  friend bool operator==(const DualCoefficients&, const DualCoefficients&) = default;
};

/// Primal coefficients N(m)^i_j, m = 1..k.
struct PrimalCoefficients {
  Context ctx{1, 1};
  std::vector<ExprMatrix> N;

  const ExprMatrix& level(int m) const { return N.at(static_cast<std::size_t>(m - 1)); }
  friend bool operator==(const PrimalCoefficients&, const PrimalCoefficients&) = default;
};

/// Checks shapes and context membership of every entry.
void validate(const DualCoefficients& d);
void validate(const PrimalCoefficients& p);

enum class ConnectionKind { miron, bucataru };

/// M(1) = dG/dy(k); M(m) = (1/m)(S(M(m-1)) + M(1) M(m-1)).
DualCoefficients miron_connection(const KSemispray& s);

/// M(m) = dG/dy(k-m+1).
DualCoefficients bucataru_connection(const KSemispray& s);

DualCoefficients make_connection(const KSemispray& s, ConnectionKind kind);

/// N(1) = M(1); N(m) = M(m) - sum_{a<m} N(m-a) M(a).
PrimalCoefficients dual_to_primal(const DualCoefficients& d);

/// M(m) = N(m) + sum_{a<m} N(m-a) M(a).
DualCoefficients primal_to_dual(const PrimalCoefficients& p);

/// basis[b] is the natural-frame expansion of the b-th adapted vector
/// (d/dx-hat first, then d/dy-hat(1), ...); cobasis row a holds the
/// natural-coframe coefficients of dx, dy-hat(1), ..., dy-hat(k).
struct AdaptedFrame {
  Context ctx{1, 1};
  std::vector<VectorField> basis;
  ExprMatrix cobasis;

  /// Column b = basis[b].
  ExprMatrix basis_matrix() const;
};

AdaptedFrame adapted_frame(const DualCoefficients& d);

/// max |<cobasis a, basis b> - delta_ab| over samples.
CheckReport verify_frame_duality(const AdaptedFrame& frame, std::span<const PhasePoint> samples,
                                 double tolerance = 1e-10);

/// Numeric coefficients in the chart x~ at one point.
struct TransformedCoefficients {
  std::vector<Eigen::MatrixXd> dual;
  std::vector<Eigen::MatrixXd> primal;
};

/// Solves the dual and primal transformation laws level by level at p.
/// Throws Error(singular_jacobian) when the chart degenerates at p.
TransformedCoefficients transform_connection_at(const DualCoefficients& d, const ChartMap& chart,
                                                const PhasePoint& p);

/// Solves the laws at each sample and measures them against the adapted
/// coframe and frame carried through the prolonged Jacobian of the chart.
CheckReport verify_coefficient_transformation(const DualCoefficients& d, const ChartMap& chart,
                                              std::span<const PhasePoint> samples, double tolerance = 1e-8);

/// Rebuilds the connection from the transformed semispray coefficients with
/// derivatives taken along the new coordinates, and compares with the
/// law-transformed coefficients of the original connection.
CheckReport verify_connection_covariance(const KSemispray& s, const ChartMap& chart, ConnectionKind kind,
                                         std::span<const PhasePoint> samples, double tolerance = 1e-8);

/// euler_degree(M(m)^i_j, m) and euler_degree(N(m)^i_j, m) at every sample.
CheckReport verify_coefficient_homogeneity(const DualCoefficients& d, std::span<const PhasePoint> samples,
                                           double tolerance = 1e-9);

enum class AutoparallelForm {
  /// dx/dt = y(1); dy(m)/dt = -sum_a M(a) d(level m-a)/dt.
  horizontal,
  /// dy(m)/dt = (m+1) y(m+1) below the top level, the chain fixing only
  /// dy(k)/dt; the rate fields of a curve's own k-extension.
  k_extension,
};

/// First-order autoparallel system, solved top-down through the triangular
/// horizontality chain.
OdeSystem autoparallel_rhs(const DualCoefficients& d, AutoparallelForm form = AutoparallelForm::horizontal);

/// Max over interior grid points and m = 1..k of
/// |dy(m)/dt + sum_a M(a) d(level m-a)/dt|, all rates by central differences.
double horizontality_residual(const Trajectory& trajectory, const DualCoefficients& d);

}  // namespace kjet
