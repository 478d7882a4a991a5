#include "kjet/kjet.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "../app/commands.hpp"

struct kjet_problem {
  kjet::app::Problem problem;
};

struct kjet_options {
  kjet::app::RunOptions options;
};

struct kjet_report {
  kjet::app::Report report;
  std::string json;
  std::string table;
};

struct kjet_expr {
  kjet::Context ctx;
  kjet::Expr expr;
  std::string text;
};

namespace {

thread_local std::string last_error;

kjet_status status_of(kjet::ErrorCode code) {
  using kjet::ErrorCode;
  switch (code) {
    case ErrorCode::syntax: return KJET_ERR_SYNTAX;
    case ErrorCode::coord_out_of_range: return KJET_ERR_COORD_OUT_OF_RANGE;
    case ErrorCode::eval: return KJET_ERR_EVAL;
    case ErrorCode::shape_mismatch: return KJET_ERR_SHAPE_MISMATCH;
    case ErrorCode::index_out_of_range: return KJET_ERR_INDEX_OUT_OF_RANGE;
    case ErrorCode::invalid_chart: return KJET_ERR_INVALID_CHART;
    case ErrorCode::invalid_domain: return KJET_ERR_INVALID_DOMAIN;
    case ErrorCode::singular_jacobian: return KJET_ERR_SINGULAR_JACOBIAN;
    case ErrorCode::singular_metric: return KJET_ERR_SINGULAR_METRIC;
    case ErrorCode::finsler_axiom_violation: return KJET_ERR_FINSLER_AXIOM_VIOLATION;
    case ErrorCode::precondition: return KJET_ERR_PRECONDITION;
    case ErrorCode::io: return KJET_ERR_IO;
    case ErrorCode::usage: return KJET_ERR_USAGE;
  }
  return KJET_ERR_INTERNAL;
}

template <class F>
kjet_status guarded(F&& fn) {
  try {
    last_error.clear();
    fn();
    return KJET_OK;
  } catch (const kjet::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return KJET_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return KJET_ERR_INTERNAL;
  }
}

kjet_status null_argument(const char* what) {
  last_error = std::string(what) + " is null";
  return KJET_ERR_INVALID_ARGUMENT;
}

double number(const std::string& key, const char* value) {
  char* end = nullptr;
  double v = std::strtod(value, &end);
  if (*value == '\0' || *end != '\0' || !std::isfinite(v)) {
    throw kjet::Error(kjet::ErrorCode::usage, "option " + key + " needs a number, got '" + value + "'");
  }
  return v;
}

}  // namespace

extern "C" {

const char* kjet_version(void) { return "1.0.0"; }

const char* kjet_status_string(kjet_status status) {
  switch (status) {
    case KJET_OK: return "ok";
    case KJET_ERR_SYNTAX: return "syntax error";
    case KJET_ERR_COORD_OUT_OF_RANGE: return "coordinate out of range";
    case KJET_ERR_EVAL: return "evaluation error";
    case KJET_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case KJET_ERR_INDEX_OUT_OF_RANGE: return "index out of range";
    case KJET_ERR_INVALID_CHART: return "invalid chart";
    case KJET_ERR_INVALID_DOMAIN: return "invalid domain";
    case KJET_ERR_SINGULAR_JACOBIAN: return "singular jacobian";
    case KJET_ERR_SINGULAR_METRIC: return "singular metric";
    case KJET_ERR_FINSLER_AXIOM_VIOLATION: return "finsler axiom violation";
    case KJET_ERR_PRECONDITION: return "precondition violated";
    case KJET_ERR_IO: return "i/o error";
    case KJET_ERR_USAGE: return "usage error";
    case KJET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KJET_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kjet_last_error(void) { return last_error.c_str(); }

kjet_status kjet_problem_load(const char* path, kjet_problem** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new kjet_problem{kjet::app::load_problem(path)}; });
}

kjet_status kjet_problem_parse(const char* text, kjet_problem** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new kjet_problem{kjet::app::parse_problem(text)}; });
}

kjet_status kjet_problem_set_seed(kjet_problem* problem, uint64_t seed) {
  if (!problem) return null_argument("problem");
  problem->problem.seed = seed;
  return KJET_OK;
}

kjet_status kjet_problem_dimensions(const kjet_problem* problem, int* n, int* k) {
  if (!problem) return null_argument("problem");
  if (n) *n = problem->problem.ctx.n();
  if (k) *k = problem->problem.ctx.k();
  return KJET_OK;
}

void kjet_problem_free(kjet_problem* problem) { delete problem; }

kjet_status kjet_options_create(kjet_options** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new kjet_options{}; });
}

kjet_status kjet_options_set(kjet_options* options, const char* key, const char* value) {
  if (!options) return null_argument("options");
  if (!key) return null_argument("key");
  if (!value) return null_argument("value");
  return guarded([&] {
    const std::string k = key;
    auto& o = options->options;
    if (k == "method") {
      o.method = value;
    } else if (k == "kind") {
      o.kind = value;
    } else if (k == "form") {
      o.form = value;
    } else if (k == "init") {
      o.init = value;
    } else if (k == "out") {
      o.out = value;
    } else if (k == "t0") {
      o.t0 = number(k, value);
    } else if (k == "t1") {
      o.t1 = number(k, value);
    } else if (k == "step") {
      o.step = number(k, value);
    } else if (k == "iterations") {
      double v = number(k, value);
      if (v != std::floor(v) || std::abs(v) > 1e6) {
        throw kjet::Error(kjet::ErrorCode::usage, "option iterations needs an integer");
      }
      o.iterations = static_cast<int>(v);
    } else {
      throw kjet::Error(kjet::ErrorCode::usage, "unknown option '" + k + "'");
    }
  });
}

void kjet_options_free(kjet_options* options) { delete options; }

kjet_status kjet_run(const kjet_problem* problem, const char* command, const kjet_options* options,
                     kjet_report** out) {
  if (!problem) return null_argument("problem");
  if (!command) return null_argument("command");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    static const kjet::app::RunOptions defaults;
    auto* r = new kjet_report{kjet::app::run_command(problem->problem, command, options ? options->options : defaults),
                              {}, {}};
    r->json = r->report.json();
    r->table = r->report.table();
    *out = r;
  });
}

int kjet_report_exit_code(const kjet_report* report) { return report ? report->report.exit_code : 1; }

const char* kjet_report_json(const kjet_report* report) { return report ? report->json.c_str() : ""; }

const char* kjet_report_table(const kjet_report* report) { return report ? report->table.c_str() : ""; }

size_t kjet_report_check_count(const kjet_report* report) { return report ? report->report.checks.size() : 0; }

kjet_status kjet_report_check(const kjet_report* report, size_t index, const char** name, const char** status,
                              double* residual) {
  if (!report) return null_argument("report");
  if (index >= report->report.checks.size()) {
    last_error = "check index out of range";
    return KJET_ERR_INDEX_OUT_OF_RANGE;
  }
  const auto& c = report->report.checks[index];
  if (name) *name = c.name.c_str();
  if (status) {
    *status = c.status == kjet::app::Status::pass ? "pass" : c.status == kjet::app::Status::fail ? "fail" : "error";
  }
  if (residual) *residual = c.residual ? *c.residual : std::numeric_limits<double>::quiet_NaN();
  return KJET_OK;
}

void kjet_report_free(kjet_report* report) { delete report; }

kjet_status kjet_expr_parse(int n, int k, const char* text, kjet_expr** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    kjet::Context ctx(n, k);
    kjet::Expr e = kjet::parse_expr(text, ctx);
    *out = new kjet_expr{ctx, e, e.str()};
  });
}

kjet_status kjet_expr_derivative(const kjet_expr* expr, int level, int index, kjet_expr** out) {
  if (!expr) return null_argument("expr");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    kjet::CoordId v{level, index};
    if (!expr->ctx.contains(v)) {
      throw kjet::Error(kjet::ErrorCode::coord_out_of_range, "coordinate outside the context");
    }
    kjet::Expr d = kjet::differentiate(expr->expr, v);
    *out = new kjet_expr{expr->ctx, d, d.str()};
  });
}

kjet_status kjet_expr_evaluate(const kjet_expr* expr, const double* values, size_t count, double* out) {
  if (!expr) return null_argument("expr");
  if (!values) return null_argument("values");
  if (!out) return null_argument("out");
  return guarded([&] {
    if (count != static_cast<size_t>(expr->ctx.dim())) {
      throw kjet::Error(kjet::ErrorCode::shape_mismatch, "expected " + std::to_string(expr->ctx.dim()) + " values");
    }
    *out = kjet::evaluate(expr->expr, kjet::PhasePoint::from_flat(expr->ctx, {values, count}));
  });
}

const char* kjet_expr_string(const kjet_expr* expr) { return expr ? expr->text.c_str() : ""; }

int kjet_expr_equal(const kjet_expr* a, const kjet_expr* b) {
  return a && b && a->ctx == b->ctx && a->expr == b->expr ? 1 : 0;
}

void kjet_expr_free(kjet_expr* expr) { delete expr; }

}  // extern "C"
