#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kjet/lagrange_finsler.hpp"
#include "kjet/phase_space.hpp"
#include "kjet/semispray.hpp"

namespace kjet::app {

struct NamedChart {
  std::string name;
  ChartMap chart;
};

/// Parsed `key = value` problem file.
struct Problem {
  std::string text;
  Context ctx{1, 1};
  std::optional<Expr> lagrangian;
  bool finsler = false;
  std::optional<std::vector<Expr>> semispray;
  std::vector<NamedChart> charts;
  Box domain;
  std::uint64_t seed = 42;
  int samples = 50;
  std::map<std::string, double> tolerances;
  std::set<std::string> expect_fail;
  std::optional<PhasePoint> init;

  double tolerance(const std::string& check, double fallback) const;
  LagrangianSpec lagrangian_spec() const;
  std::vector<PhasePoint> sample(int count) const;
  std::vector<PhasePoint> sample() const { return sample(samples); }
};

/// Throws Error(syntax) with the offending line number.
Problem parse_problem(std::string_view text);

/// Throws Error(io) when the file cannot be read.
Problem load_problem(const std::string& path);

/// "0;1;1" in natural-frame order; commas are accepted as separators too.
PhasePoint parse_state(std::string_view text, const Context& ctx);

/// Hex SHA-256 of bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace kjet::app
