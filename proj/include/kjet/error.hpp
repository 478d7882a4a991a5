#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kjet {

enum class ErrorCode {
  syntax,
  coord_out_of_range,
  eval,
  shape_mismatch,
  index_out_of_range,
  invalid_chart,
  invalid_domain,
  singular_jacobian,
  singular_metric,
  finsler_axiom_violation,
  precondition,
  io,
  usage,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure with the byte offset into the input at which it was detected.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error(ErrorCode::syntax, what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace kjet
