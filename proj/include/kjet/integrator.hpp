#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "kjet/phase_space.hpp"

namespace kjet {

class KSemispray;

/// First-order system on the (k+1)n natural coordinates; rhs[slot] is the
/// time derivative of the coordinate at that slot.
struct OdeSystem {
  OdeSystem(Context ctx_, std::vector<Expr> rhs_);

  Context ctx;
  std::vector<Expr> rhs;

  std::vector<double> evaluate(const PhasePoint& p) const;
};

struct Trajectory {
  Context ctx{1, 1};
  std::vector<double> times;
  std::vector<PhasePoint> states;
  /// Set when integration stopped because y(1) entered the slit margin; the
  /// final state is the first one inside the margin.
  bool left_slit_domain = false;
};

struct IntegratorConfig {
  double step = 1e-3;
  double slit_margin = kSlitMargin;
};

/// dx/dt = y(1), dy(m)/dt = (m+1) y(m+1), dy(k)/dt = -(k+1) G.
OdeSystem kpath_system(const KSemispray& s);

/// Classical four-stage Runge-Kutta on the uniform grid t0, t0 + step, ...,
/// t1. Throws Error(precondition) for an inadmissible initial state or a
/// span that is not a whole number of steps, and Error(eval) with the time
/// of failure when the right side cannot be evaluated.
Trajectory integrate(const OdeSystem& system, const PhasePoint& init, double t0, double t1,
                     const IntegratorConfig& config);

/// Max over interior grid points of |central difference - rhs|_inf.
double residual_along(const Trajectory& trajectory, const OdeSystem& system);

/// Max over grid points of the inf-norm distance between states; the
/// trajectories must share a grid prefix.
double max_state_gap(const Trajectory& a, const Trajectory& b);

/// Header t,x1..xn,y1_1..y1_n,...,yk_1..yk_n then one row per grid point,
/// 17 significant digits.
void write_csv(const Trajectory& trajectory, std::ostream& out);

}  // namespace kjet
