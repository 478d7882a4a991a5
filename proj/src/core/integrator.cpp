#include "kjet/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "kjet/semispray.hpp"

namespace kjet {

OdeSystem::OdeSystem(Context ctx_, std::vector<Expr> rhs_) : ctx(ctx_.ambient()), rhs(std::move(rhs_)) {
  if (rhs.size() != static_cast<std::size_t>(ctx.dim())) {
    throw Error(ErrorCode::shape_mismatch, "ODE system needs " + std::to_string(ctx.dim()) + " right-hand sides");
  }
}

std::vector<double> OdeSystem::evaluate(const PhasePoint& p) const {
  std::vector<double> out(rhs.size());
  for (std::size_t s = 0; s < rhs.size(); ++s) out[s] = kjet::evaluate(rhs[s], p);
  return out;
}

OdeSystem kpath_system(const KSemispray& s) {
  VectorField field = assemble_field(s);
  return OdeSystem(s.context(), std::vector<Expr>(field.components().begin(), field.components().end()));
}

Trajectory integrate(const OdeSystem& system, const PhasePoint& init, double t0, double t1,
                     const IntegratorConfig& config) {
  const Context& ctx = system.ctx;
  if (!(config.step > 0.0) || !std::isfinite(config.step)) {
    throw Error(ErrorCode::precondition, "integrator step must be positive");
  }
  if (t1 < t0) throw Error(ErrorCode::precondition, "integration interval must satisfy t0 <= t1");
  const double span = t1 - t0;
  const double count_real = span / config.step;
  const long steps = std::lround(count_real);
  if (std::abs(static_cast<double>(steps) * config.step - span) > 1e-9 * std::max(1.0, std::abs(span))) {
    throw Error(ErrorCode::precondition, "(t1 - t0) / step must be a whole number");
  }
  std::vector<double> state = init.flat();
  if (state.size() != static_cast<std::size_t>(ctx.dim())) {
    throw Error(ErrorCode::shape_mismatch, "initial state has the wrong shape");
  }
  if (init.velocity_norm() < config.slit_margin) {
    throw Error(ErrorCode::precondition, "initial state lies on the null section margin: " + init.str());
  }

  Trajectory traj;
  traj.ctx = ctx;
  traj.times.reserve(static_cast<std::size_t>(steps + 1));
  traj.states.reserve(static_cast<std::size_t>(steps + 1));
  traj.times.push_back(t0);
  traj.states.push_back(PhasePoint::from_flat(ctx, state));

  const double h = config.step;
  const std::size_t dim = state.size();
  std::vector<double> stage(dim);
  auto rate = [&](std::span<const double> s, double t) {
    try {
      return system.evaluate(PhasePoint::from_flat(ctx, s));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (t = " + std::to_string(t) + ")");
    }
  };
  for (long i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    auto k1 = rate(state, t);
    for (std::size_t d = 0; d < dim; ++d) stage[d] = state[d] + 0.5 * h * k1[d];
    auto k2 = rate(stage, t + 0.5 * h);
    for (std::size_t d = 0; d < dim; ++d) stage[d] = state[d] + 0.5 * h * k2[d];
    auto k3 = rate(stage, t + 0.5 * h);
    for (std::size_t d = 0; d < dim; ++d) stage[d] = state[d] + h * k3[d];
    auto k4 = rate(stage, t + h);
    for (std::size_t d = 0; d < dim; ++d) state[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);

    traj.times.push_back(t0 + static_cast<double>(i + 1) * h);
    traj.states.push_back(PhasePoint::from_flat(ctx, state));
    if (traj.states.back().velocity_norm() < config.slit_margin) {
      traj.left_slit_domain = true;
      break;
    }
  }
  return traj;
}

double residual_along(const Trajectory& trajectory, const OdeSystem& system) {
  double worst = 0.0;
  const auto& st = trajectory.states;
  for (std::size_t i = 1; i + 1 < st.size(); ++i) {
    const double dt = trajectory.times[i + 1] - trajectory.times[i - 1];
    auto before = st[i - 1].flat();
    auto after = st[i + 1].flat();
    auto rhs = system.evaluate(st[i]);
    for (std::size_t d = 0; d < rhs.size(); ++d) {
      worst = std::max(worst, std::abs((after[d] - before[d]) / dt - rhs[d]));
    }
  }
  return worst;
}

double max_state_gap(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  const std::size_t n = std::min(a.states.size(), b.states.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto sa = a.states[i].flat();
    auto sb = b.states[i].flat();
    for (std::size_t d = 0; d < sa.size(); ++d) worst = std::max(worst, std::abs(sa[d] - sb[d]));
  }
  return worst;
}

void write_csv(const Trajectory& trajectory, std::ostream& out) {
  const Context& ctx = trajectory.ctx;
  out << "t";
  for (int i = 1; i <= ctx.n(); ++i) out << ",x" << i;
  for (int m = 1; m <= ctx.k(); ++m) {
    for (int i = 1; i <= ctx.n(); ++i) out << ",y" << m << "_" << i;
  }
  out << "\n";
  char buf[40];
  for (std::size_t r = 0; r < trajectory.states.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", trajectory.times[r]);
    out << buf;
    for (double v : trajectory.states[r].flat()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

}  // namespace kjet
