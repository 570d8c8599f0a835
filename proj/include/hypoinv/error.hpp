#pragma once

#include <stdexcept>
#include <string>

namespace hypoinv {

enum class ErrorCode {
  invalid_argument = 1,
  size_mismatch,
  symmetry_violation,
  singular,
  not_converged,
  config,
  io,
  usage,
};

/// Exception carrying a machine-readable code; the C API maps it to hi_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hypoinv
