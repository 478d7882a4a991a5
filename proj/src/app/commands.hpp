#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "problem.hpp"

namespace kjet::app {

struct RunOptions {
  std::string method = "miron";
  int iterations = 3;
  std::string kind = "kpath";
  std::string form = "k_extension";
  std::optional<std::string> init;
  double t0 = 0.0;
  double t1 = 1.0;
  double step = 1e-3;
  std::optional<std::string> out;
};

enum class Status { pass, fail, error };

struct CheckLine {
  std::string name;
  Status status = Status::pass;
  std::optional<double> residual;
  double tolerance = 0.0;
  std::optional<std::vector<double>> point;
  std::string detail;
  bool expected_fail = false;
};

struct Report {
  std::string command;
  std::string input_sha256;
  std::vector<std::string> output;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<CheckLine> checks;
  std::string error;
  int exit_code = 0;
  double elapsed_ms = 0.0;

  std::string json() const;
  std::string table() const;
};

/// Process exit code for an error category: 2 singular metric, 3 Finsler
/// violation, 1 otherwise.
int exit_code_for(ErrorCode code);

/// The five commands: semispray, connection, sequence, integrate, verify.
/// Throws Error(usage) for an unknown command or invalid options; errors
/// raised while computing are folded into the report and its exit code.
Report run_command(const Problem& problem, const std::string& command, const RunOptions& options);

}  // namespace kjet::app
