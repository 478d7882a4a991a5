#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>

#include "kjet/kjet.h"

namespace {

struct Args {
  std::string file;
  std::string report = "table";
  std::string method = "miron";
  int iterations = 3;
  std::string kind = "kpath";
  std::string form = "k_extension";
  std::string init;
  double t0 = 0.0;
  double t1 = 1.0;
  double step = 1e-3;
  std::string out;
};

int fail(const char* what, kjet_status status) {
  std::fprintf(stderr, "kjet: %s: %s: %s\n", what, kjet_status_string(status), kjet_last_error());
  return 1;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ProblemPtr = std::unique_ptr<kjet_problem, Deleter<kjet_problem, kjet_problem_free>>;
using OptionsPtr = std::unique_ptr<kjet_options, Deleter<kjet_options, kjet_options_free>>;
using ReportPtr = std::unique_ptr<kjet_report, Deleter<kjet_report, kjet_report_free>>;

CLI::App* add_command(CLI::App& app, const char* name, const char* about, Args& a) {
  CLI::App* sub = app.add_subcommand(name, about);
  sub->add_option("file", a.file, "problem file")->required();
  sub->add_option("--report", a.report, "report format")->check(CLI::IsMember({"json", "table"}));
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  Args a;
  CLI::App app{"Higher-order semisprays, nonlinear connections and Finsler spaces of order k"};
  app.require_subcommand(1);
  add_command(app, "semispray", "canonical semispray coefficients of the problem", a);
  CLI::App* connection = add_command(app, "connection", "nonlinear connection coefficients", a);
  connection->add_option("--method", a.method, "miron, bucataru or cartan")
      ->check(CLI::IsMember({"miron", "bucataru", "cartan"}));
  CLI::App* sequence = add_command(app, "sequence", "iterated semisprays", a);
  sequence->add_option("--iterations", a.iterations, "number of iterates");
  CLI::App* integrate = add_command(app, "integrate", "integrate a k-path or autoparallel curve", a);
  integrate->add_option("--kind", a.kind, "kpath or autoparallel")->check(CLI::IsMember({"kpath", "autoparallel"}));
  integrate->add_option("--method", a.method, "connection for autoparallels")
      ->check(CLI::IsMember({"miron", "bucataru", "cartan"}));
  integrate->add_option("--form", a.form, "autoparallel system form")
      ->check(CLI::IsMember({"horizontal", "k_extension"}));
  integrate->add_option("--init", a.init, "initial state, natural-frame order, ';'-separated");
  integrate->add_option("--t0", a.t0, "start time");
  integrate->add_option("--t1", a.t1, "end time");
  integrate->add_option("--step", a.step, "fixed step");
  integrate->add_option("--out", a.out, "CSV output path");
  add_command(app, "verify", "run the full check suite on the problem", a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  kjet_problem* raw_problem = nullptr;
  kjet_status st = kjet_problem_load(a.file.c_str(), &raw_problem);
  if (st != KJET_OK) return fail(a.file.c_str(), st);
  ProblemPtr problem(raw_problem);

  if (const char* seed = std::getenv("KJET_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(seed, &end, 10);
    if (*seed == '\0' || *end != '\0' || *seed == '-') {
      std::fprintf(stderr, "kjet: KJET_SEED must be a nonnegative integer\n");
      return 1;
    }
    kjet_problem_set_seed(problem.get(), v);
  }

  kjet_options* raw_options = nullptr;
  if ((st = kjet_options_create(&raw_options)) != KJET_OK) return fail("options", st);
  OptionsPtr options(raw_options);
  auto set = [&](const char* key, const std::string& value) {
    kjet_status s = kjet_options_set(options.get(), key, value.c_str());
    if (s != KJET_OK) std::exit(fail(key, s));
  };
  auto number = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  set("method", a.method);
  set("iterations", std::to_string(a.iterations));
  set("kind", a.kind);
  set("form", a.form);
  set("t0", number(a.t0));
  set("t1", number(a.t1));
  set("step", number(a.step));
  if (!a.init.empty()) set("init", a.init);
  if (!a.out.empty()) set("out", a.out);

  kjet_report* raw_report = nullptr;
  if ((st = kjet_run(problem.get(), command.c_str(), options.get(), &raw_report)) != KJET_OK) {
    return fail(command.c_str(), st);
  }
  ReportPtr report(raw_report);
  std::fputs(a.report == "json" ? kjet_report_json(report.get()) : kjet_report_table(report.get()), stdout);
  return kjet_report_exit_code(report.get());
}
