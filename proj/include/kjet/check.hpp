#pragma once

#include <optional>
#include <string>

#include "kjet/point.hpp"

namespace kjet {

/// Outcome of a sampled or symbolic verification.
struct CheckReport {
  std::string name;
  bool passed = true;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::optional<PhasePoint> worst_point;
  std::string detail;

  CheckReport() = default;
  CheckReport(std::string name_, double tolerance_) : name(std::move(name_)), tolerance(tolerance_) {}

  /// Track the largest residual and where it occurred.
  void record(double residual, const PhasePoint& at) {
    if (!worst_point || residual > max_residual) {
      max_residual = residual;
      worst_point = at;
    }
  }

  /// passed := max_residual <= tolerance
  CheckReport& settle() {
    passed = max_residual <= tolerance;
    return *this;
  }

  void merge(const CheckReport& other) {
    if (other.worst_point && (!worst_point || other.max_residual > max_residual)) {
      max_residual = other.max_residual;
      worst_point = other.worst_point;
    }
    passed = passed && other.passed;
    if (!other.detail.empty()) detail += (detail.empty() ? "" : "; ") + other.detail;
  }
};

}  // namespace kjet
