#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "kjet/connections.hpp"
#include "kjet/integrator.hpp"
#include "kjet/lagrange_finsler.hpp"

namespace kjet::app {

namespace {

using Json = nlohmann::ordered_json;

const char* status_name(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::error: return "error";
  }
  return "error";
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string point_str(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + fmt("%.6g", v[i]);
  return s + ")";
}

std::string with_degree(const Expr& e, const Context& ctx) {
  std::string s = e.str();
  if (auto d = homogeneity_degree(e, ctx)) s += "  (degree " + std::to_string(*d) + ")";
  return s;
}

ConnectionKind kind_of(const std::string& method) {
  return method == "bucataru" ? ConnectionKind::bucataru : ConnectionKind::miron;
}

double matrix_gap(const ExprMatrix& a, const ExprMatrix& b, std::span<const PhasePoint> pts, PhasePoint* worst) {
  double gap = -1.0;
  for (const auto& p : pts) {
    double g = (a.evaluate(p) - b.evaluate(p)).cwiseAbs().maxCoeff();
    if (g > gap) {
      gap = g;
      if (worst) *worst = p;
    }
  }
  return std::max(gap, 0.0);
}

Json matrix_json(const ExprMatrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j).str());
    rows.push_back(row);
  }
  return rows;
}

Json coefficients_json(const KSemispray& s) {
  Json out = Json::array();
  for (const auto& g : s.coefficients()) out.push_back(g.str());
  return out;
}

class Runner {
 public:
  Runner(const Problem& problem, Report& report) : p(problem), r(report) {}

  const Problem& p;
  Report& r;

  CheckLine line(const CheckReport& c, const std::string& name) const {
    CheckLine l;
    l.name = name;
    l.status = c.passed ? Status::pass : Status::fail;
    l.residual = c.max_residual;
    l.tolerance = c.tolerance;
    if (c.worst_point) l.point = c.worst_point->flat();
    l.detail = c.detail;
    return l;
  }

  CheckLine numeric(const std::string& name, bool passed, double residual, double tolerance,
                    const std::optional<PhasePoint>& at, std::string detail) const {
    CheckLine l;
    l.name = name;
    l.status = passed ? Status::pass : Status::fail;
    l.residual = residual;
    l.tolerance = tolerance;
    if (at && !at->x.empty()) l.point = at->flat();
    l.detail = std::move(detail);
    return l;
  }

  void add(CheckLine l) {
    l.expected_fail = p.expect_fail.count(l.name) > 0;
    r.checks.push_back(std::move(l));
  }

  /// Runs fn; an Error becomes an error line and sets the exit code once.
  bool check(const std::string& name, const std::function<CheckLine()>& fn) {
    try {
      add(fn());
      return true;
    } catch (const Error& e) {
      error_line(name, e);
      return false;
    }
  }

  void error_line(const std::string& name, const Error& e) {
    CheckLine l;
    l.name = name;
    l.status = Status::error;
    l.detail = e.what();
    add(std::move(l));
    if (r.exit_code == 0) r.exit_code = exit_code_for(e.code());
  }

  KSemispray semispray() const {
    if (p.semispray) return KSemispray(p.ctx, *p.semispray);
    return canonical_semispray(p.lagrangian_spec());
  }

  DualCoefficients connection(const std::string& method, const KSemispray* s) {
    if (method == "cartan") {
      if (!p.lagrangian || !p.finsler) throw Error(ErrorCode::finsler_axiom_violation, "problem is not declared Finsler");
      auto pts = p.sample();
      LagrangianSpec spec = p.lagrangian_spec();
      add(line(finsler_check(spec, pts), "finsler_axioms"));
      return cartan_connection(spec, pts);
    }
    return make_connection(*s, kind_of(method));
  }

  void print_semispray(const KSemispray& s, const std::string& prefix = "") {
    for (int i = 1; i <= p.ctx.n(); ++i) {
      r.output.push_back(prefix + "G" + std::to_string(i) + " = " + with_degree(s.coefficient(i), p.ctx));
    }
  }
};

void cmd_semispray(Runner& run) {
  const Problem& p = run.p;
  auto pts = p.sample();
  if (p.lagrangian && !p.semispray) {
    LagrangianSpec spec = p.lagrangian_spec();
    run.check("metric_regularity", [&] {
      return run.line(regularity_check(metric_tensor(spec), pts, p.tolerance("metric_regularity", kRegularityThreshold)),
                      "metric_regularity");
    });
    if (p.ctx.n() > kSymbolicInverseMaxDim) {
      CanonicalSemisprayEvaluator eval(spec);
      Json values = Json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(pts.size(), 5); ++i) {
        auto g = eval(pts[i]);
        values.push_back({{"point", pts[i].flat()}, {"G", g}});
        std::string s = "G at " + point_str(pts[i].flat()) + " =";
        for (double v : g) s += " " + fmt("%.17g", v);
        run.r.output.push_back(s);
      }
      run.r.results["G_samples"] = values;
      return;
    }
  }
  KSemispray s = run.semispray();
  run.print_semispray(s);
  run.r.results["G"] = coefficients_json(s);
  run.check("semispray_criterion", [&] { return run.line(verify_semispray(assemble_field(s)), "semispray_criterion"); });
  run.check("is_kspray", [&] { return run.line(is_kspray(s, pts, p.tolerance("is_kspray", 1e-9)), "is_kspray"); });
}

void cmd_connection(Runner& run, const RunOptions& opt) {
  const Problem& p = run.p;
  auto pts = p.sample();
  std::optional<KSemispray> s;
  if (opt.method != "cartan") s = run.semispray();
  DualCoefficients d = run.connection(opt.method, s ? &*s : nullptr);
  PrimalCoefficients primal = dual_to_primal(d);
  const std::string dual_name = opt.method == "bucataru" ? "M*" : "M";
  Json dual = Json::array(), prim = Json::array();
  for (int m = 1; m <= p.ctx.k(); ++m) {
    for (int i = 0; i < p.ctx.n(); ++i) {
      for (int j = 0; j < p.ctx.n(); ++j) {
        std::string idx = "(" + std::to_string(m) + ")[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
        run.r.output.push_back(dual_name + idx + " = " + with_degree(d.level(m)(i, j), p.ctx));
      }
    }
    dual.push_back(matrix_json(d.level(m)));
  }
  for (int m = 1; m <= p.ctx.k(); ++m) {
    for (int i = 0; i < p.ctx.n(); ++i) {
      for (int j = 0; j < p.ctx.n(); ++j) {
        std::string idx = "(" + std::to_string(m) + ")[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
        run.r.output.push_back("N" + idx + " = " + with_degree(primal.level(m)(i, j), p.ctx));
      }
    }
    prim.push_back(matrix_json(primal.level(m)));
  }
  run.r.results["method"] = opt.method;
  run.r.results["dual"] = dual;
  run.r.results["primal"] = prim;
  run.check("frame_duality", [&] {
    return run.line(verify_frame_duality(adapted_frame(d), pts, p.tolerance("frame_duality", 1e-10)), "frame_duality");
  });
  if (opt.method == "cartan") {
    run.check("cartan_level_one", [&] {
      PhasePoint at;
      double gap = matrix_gap(cartan_level_one(p.lagrangian_spec()), d.level(1), pts, &at);
      double tol = p.tolerance("cartan_level_one", 1e-9);
      return run.numeric("cartan_level_one", gap <= tol, gap, tol, at, "closed form against the Miron route");
    });
  }
}

void cmd_sequence(Runner& run, const RunOptions& opt) {
  const Problem& p = run.p;
  auto pts = p.sample();
  KSemispray s = run.semispray();
  auto seq = semispray_sequence(s, opt.iterations);
  Json iterates = Json::array(), equal = Json::array();
  double gap = 0.0;
  std::optional<PhasePoint> worst;
  bool all_equal = true;
  for (std::size_t m = 0; m < seq.size(); ++m) {
    run.print_semispray(seq[m], "S(" + std::to_string(m + 1) + "): ");
    iterates.push_back(coefficients_json(seq[m]));
    if (m == 0) continue;
    bool same = seq[m] == seq[m - 1];
    all_equal = all_equal && same;
    equal.push_back(same);
    PhasePoint at;
    double g = max_coefficient_gap(seq[m], seq[m - 1], pts, &at);
    if (!worst || g > gap) {
      gap = g;
      worst = at;
    }
  }
  run.r.results["iterates"] = iterates;
  run.r.results["consecutive_equal"] = equal;
  run.r.results["max_gap"] = gap;
  const double tol = p.tolerance("sequence_constancy", 1e-9);
  run.add(run.numeric("sequence_constancy", all_equal || gap <= tol, gap, tol, worst,
                      all_equal ? "iterates canonically equal" : "max gap between consecutive iterates"));
}

void cmd_integrate(Runner& run, const RunOptions& opt) {
  const Problem& p = run.p;
  PhasePoint init = opt.init ? parse_state(*opt.init, p.ctx) : *p.init;
  KSemispray s = run.semispray();
  std::optional<DualCoefficients> d;
  const AutoparallelForm form = opt.form == "horizontal" ? AutoparallelForm::horizontal : AutoparallelForm::k_extension;
  OdeSystem sys = opt.kind == "kpath" ? kpath_system(s) : autoparallel_rhs(*(d = run.connection(opt.method, &s)), form);
  Trajectory traj = integrate(sys, init, opt.t0, opt.t1, {opt.step});
  if (opt.out) {
    std::ofstream f(*opt.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + *opt.out);
    write_csv(traj, f);
    if (!f) throw Error(ErrorCode::io, "cannot write " + *opt.out);
  }
  const PhasePoint& last = traj.states.back();
  run.r.results["steps"] = traj.states.size() - 1;
  run.r.results["final_time"] = traj.times.back();
  run.r.results["final_state"] = last.flat();
  run.r.results["left_slit_domain"] = traj.left_slit_domain;
  std::string final = "final state at t = " + fmt("%.17g", traj.times.back()) + ":";
  for (double v : last.flat()) final += " " + fmt("%.17g", v);
  run.r.output.push_back(final);
  if (traj.left_slit_domain) run.r.output.push_back("trajectory entered the slit margin; integration stopped");

  const double tol = p.tolerance("trajectory_residual", 1e-5);
  const double self = residual_along(traj, sys);
  run.add(run.numeric("trajectory_residual", self <= tol, self, tol, std::nullopt,
                      "central differences against the integrated system"));
  if (d && form == AutoparallelForm::horizontal) {
    const double htol = p.tolerance("horizontality", 1e-5);
    double h = horizontality_residual(traj, *d);
    run.add(run.numeric("horizontality", h <= htol, h, htol, std::nullopt, "horizontality of the velocity"));
  }
  if (d && opt.method == "bucataru") {
    const double ntol = p.tolerance("next_kpath_residual", 1e-5);
    double res = residual_along(traj, kpath_system(next_semispray(s)));
    run.add(run.numeric("next_kpath_residual", res <= ntol, res, ntol, std::nullopt,
                        "against the k-path system of the next semispray"));
  }
  if (traj.left_slit_domain && run.r.exit_code == 0) run.r.exit_code = 4;
}

void cmd_verify(Runner& run) {
  const Problem& p = run.p;
  auto pts = p.sample();
  if (p.lagrangian) {
    LagrangianSpec spec = p.lagrangian_spec();
    run.check("metric_regularity", [&] {
      return run.line(regularity_check(metric_tensor(spec), pts, p.tolerance("metric_regularity", kRegularityThreshold)),
                      "metric_regularity");
    });
    run.check("lagrange_signature", [&] { return run.line(signature_check(metric_tensor(spec), pts), "lagrange_signature"); });
    if (p.finsler) run.check("finsler_axioms", [&] { return run.line(finsler_check(spec, pts), "finsler_axioms"); });
  }
  std::optional<KSemispray> maybe;
  try {
    maybe = run.semispray();
  } catch (const Error& e) {
    run.error_line(p.semispray ? "semispray" : "canonical_semispray", e);
    return;
  }
  const KSemispray& s = *maybe;
  run.print_semispray(s);
  run.r.results["G"] = coefficients_json(s);

  run.check("semispray_criterion", [&] { return run.line(verify_semispray(assemble_field(s)), "semispray_criterion"); });
  bool spray = false;
  run.check("is_kspray", [&] {
    CheckLine l = run.line(is_kspray(s, pts, p.tolerance("is_kspray", 1e-9)), "is_kspray");
    spray = l.status == Status::pass;
    return l;
  });
  run.r.results["spray"] = spray;

  auto seq = semispray_sequence(s, 5);
  run.check("sequence_constancy", [&] {
    const double tol = p.tolerance("sequence_constancy", 1e-9);
    double gap = 0.0;
    bool equal = true;
    std::optional<PhasePoint> worst;
    for (std::size_t m = 1; m < seq.size(); ++m) {
      equal = equal && seq[m] == seq[m - 1];
      PhasePoint at;
      double g = max_coefficient_gap(seq[m], seq[m - 1], pts, &at);
      if (!worst || g > gap) {
        gap = g;
        worst = at;
      }
    }
    return run.numeric("sequence_constancy", equal || gap <= tol, gap, tol, worst,
                       equal ? "iterates canonically equal" : "max gap between consecutive iterates");
  });

  for (ConnectionKind kind : {ConnectionKind::miron, ConnectionKind::bucataru}) {
    const std::string name = kind == ConnectionKind::miron ? "miron" : "bucataru";
    DualCoefficients d = make_connection(s, kind);
    run.check(name + "_sequence_constancy", [&] {
      const double tol = p.tolerance(name + "_sequence_constancy", 1e-9);
      double gap = 0.0;
      bool equal = true;
      std::optional<PhasePoint> worst;
      for (std::size_t m = 1; m < 3; ++m) {
        DualCoefficients later = make_connection(seq[m], kind);
        equal = equal && later == d;
        for (int level = 1; level <= p.ctx.k(); ++level) {
          PhasePoint at;
          double g = matrix_gap(later.level(level), d.level(level), pts, &at);
          if (!worst || g > gap) {
            gap = g;
            worst = at;
          }
        }
      }
      return run.numeric(name + "_sequence_constancy", equal || gap <= tol, gap, tol, worst,
                         equal ? "coefficients of the iterates canonically equal" : "max coefficient gap over iterates");
    });
    run.check(name + "_frame_duality", [&] {
      return run.line(verify_frame_duality(adapted_frame(d), pts, p.tolerance(name + "_frame_duality", 1e-10)),
                      name + "_frame_duality");
    });
    run.check(name + "_roundtrip", [&] {
      PrimalCoefficients primal = dual_to_primal(d);
      bool ok = primal_to_dual(primal) == d && dual_to_primal(primal_to_dual(primal)) == primal;
      CheckLine l;
      l.name = name + "_roundtrip";
      l.status = ok ? Status::pass : Status::fail;
      l.detail = "dual and primal coefficients convert back canonically";
      return l;
    });
    if (spray) {
      run.check(name + "_homogeneity", [&] {
        return run.line(verify_coefficient_homogeneity(d, pts, p.tolerance(name + "_homogeneity", 1e-9)),
                        name + "_homogeneity");
      });
    }
  }

  for (const auto& [chart_name, chart] : p.charts) {
    const std::string tag = "[" + chart_name + "]";
    run.check("semispray_covariance" + tag, [&] {
      return run.line(verify_coefficient_covariance(s, chart, pts, p.tolerance("semispray_covariance", 1e-8)),
                      "semispray_covariance" + tag);
    });
    for (ConnectionKind kind : {ConnectionKind::miron, ConnectionKind::bucataru}) {
      const std::string name = kind == ConnectionKind::miron ? "miron" : "bucataru";
      run.check(name + "_covariance" + tag, [&] {
        return run.line(verify_connection_covariance(s, chart, kind, pts, p.tolerance(name + "_covariance", 1e-8)),
                        name + "_covariance" + tag);
      });
    }
  }

  auto inits = p.sample(10);
  run.check("autoparallel_kpath", [&] {
    OdeSystem autoparallel = autoparallel_rhs(bucataru_connection(s), AutoparallelForm::k_extension);
    OdeSystem target = kpath_system(next_semispray(s));
    const double tol = p.tolerance("autoparallel_kpath", 1e-5);
    double worst = 0.0;
    std::optional<PhasePoint> at;
    for (const auto& init : inits) {
      double res = residual_along(integrate(autoparallel, init, 0.0, 0.5, {1e-3}), target);
      if (!at || res > worst) {
        worst = res;
        at = init;
      }
    }
    return run.numeric("autoparallel_kpath", worst <= tol, worst, tol, at,
                       "Bucataru autoparallels against the k-path system of the next semispray");
  });
  run.check("kpath_coincidence", [&] {
    OdeSystem first = kpath_system(s), second = kpath_system(next_semispray(s));
    const double t1 = spray ? 0.5 : 1.0;
    const double tol = spray ? p.tolerance("kpath_coincidence", 1e-8) : 1e-3;
    double gap = 0.0;
    std::optional<PhasePoint> at;
    for (const auto& init : inits) {
      double g = max_state_gap(integrate(first, init, 0.0, t1, {1e-3}), integrate(second, init, 0.0, t1, {1e-3}));
      if (!at || g > gap) {
        gap = g;
        at = init;
      }
    }
    bool ok = spray ? gap <= tol : gap >= tol;
    return run.numeric("kpath_coincidence", ok, gap, tol, at,
                       spray ? "spray: k-paths of the semispray and its successor coincide"
                             : "not a spray: k-paths of the semispray and its successor separate");
  });

  if (p.finsler) {
    LagrangianSpec spec = p.lagrangian_spec();
    run.check("cartan_level_one", [&] {
      DualCoefficients cartan = cartan_connection(spec, pts);
      PhasePoint at;
      double gap = matrix_gap(cartan_level_one(spec), cartan.level(1), pts, &at);
      double tol = p.tolerance("cartan_level_one", 1e-9);
      return run.numeric("cartan_level_one", gap <= tol, gap, tol, at, "closed form against the Miron route");
    });
    run.check("cartan_homogeneity", [&] {
      return run.line(verify_coefficient_homogeneity(cartan_connection(spec, pts), pts,
                                                     p.tolerance("cartan_homogeneity", 1e-9)),
                      "cartan_homogeneity");
    });
  }
}

void validate(const std::string& command, const RunOptions& opt, const Problem& p) {
  auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed, const char* what) {
    for (const char* a : allowed) {
      if (v == a) return;
    }
    throw Error(ErrorCode::usage, std::string("unknown ") + what + " '" + v + "'");
  };
  one_of(command, {"semispray", "connection", "sequence", "integrate", "verify"}, "command");
  one_of(opt.method, {"miron", "bucataru", "cartan"}, "method");
  one_of(opt.kind, {"kpath", "autoparallel"}, "kind");
  one_of(opt.form, {"horizontal", "k_extension"}, "form");
  if (command == "sequence" && opt.iterations < 1) throw Error(ErrorCode::usage, "--iterations must be at least 1");
  if (command == "integrate") {
    if (!opt.init && !p.init) throw Error(ErrorCode::usage, "integrate needs --init or an init entry in the problem file");
    if (opt.init) parse_state(*opt.init, p.ctx);
  }
}

std::string command_echo(const std::string& command, const RunOptions& opt) {
  std::string s = command;
  if (command == "connection") s += " --method " + opt.method;
  if (command == "sequence") s += " --iterations " + std::to_string(opt.iterations);
  if (command == "integrate") {
    s += " --kind " + opt.kind;
    if (opt.kind == "autoparallel") s += " --method " + opt.method + " --form " + opt.form;
    if (opt.init) s += " --init " + *opt.init;
    s += " --t0 " + fmt("%.17g", opt.t0) + " --t1 " + fmt("%.17g", opt.t1) + " --step " + fmt("%.17g", opt.step);
  }
  return s;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::singular_metric: return 2;
    case ErrorCode::finsler_axiom_violation: return 3;
    default: return 1;
  }
}

Report run_command(const Problem& problem, const std::string& command, const RunOptions& options) {
  validate(command, options, problem);
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.command = command_echo(command, options);
  report.input_sha256 = sha256_hex(problem.text);
  report.results["seed"] = problem.seed;
  Runner run(problem, report);
  try {
    if (command == "semispray") cmd_semispray(run);
    if (command == "connection") cmd_connection(run, options);
    if (command == "sequence") cmd_sequence(run, options);
    if (command == "integrate") cmd_integrate(run, options);
    if (command == "verify") cmd_verify(run);
  } catch (const Error& e) {
    report.error = e.what();
    report.exit_code = exit_code_for(e.code());
  }
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string Report::json() const {
  Json checks_json = Json::array();
  for (const auto& c : checks) {
    Json j;
    j["name"] = c.name;
    j["status"] = status_name(c.status);
    j["residual"] = c.residual ? Json(*c.residual) : Json(nullptr);
    j["tolerance"] = c.tolerance;
    j["point"] = c.point ? Json(*c.point) : Json(nullptr);
    j["detail"] = c.detail;
    if (c.expected_fail) j["expected_fail"] = true;
    checks_json.push_back(j);
  }
  Json out;
  out["command"] = command;
  out["input_sha256"] = input_sha256;
  out["checks"] = checks_json;
  out["results"] = results;
  out["output"] = output;
  if (!error.empty()) out["error"] = error;
  out["exit_code"] = exit_code;
  out["elapsed_ms"] = elapsed_ms;
  return out.dump(2) + "\n";
}

std::string Report::table() const {
  std::ostringstream os;
  os << "kjet " << command << "\n";
  os << "input sha256: " << input_sha256 << "\n";
  for (const auto& l : output) os << l << "\n";
  if (!checks.empty()) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "\n%-36s %-16s %-11s %-11s %s\n", "check", "status", "residual", "tolerance", "point");
    os << buf;
    for (const auto& c : checks) {
      std::string status = status_name(c.status);
      if (c.expected_fail) status += " (expected)";
      std::string residual = c.residual ? fmt("%.3e", *c.residual) : "-";
      std::string point = c.point ? point_str(*c.point) : "-";
      std::snprintf(buf, sizeof buf, "%-36s %-16s %-11s %-11s %s\n", c.name.c_str(), status.c_str(), residual.c_str(),
                    fmt("%.1e", c.tolerance).c_str(), point.c_str());
      os << buf;
      if (c.status != Status::pass && !c.detail.empty()) os << "    " << c.detail << "\n";
    }
  }
  if (!error.empty()) os << "error: " << error << "\n";
  return os.str();
}

}  // namespace kjet::app
