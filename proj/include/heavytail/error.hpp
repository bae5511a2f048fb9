#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heavytail {

enum class ErrorKind {
  kInvalidInput,
  kInvalidParameter,
  kInfiniteMean,
  kConvergence,
  kBracket,
  kOptimization,
  kInsufficientData,
  kDegenerateData,
  kFitFailure,
  kExtrapolationDomain,
  kSubThreshold,
  kFileNotFound,
  kParse,
  kEmptyInput,
  kConfig,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind lets
/// callers (notably the CLI) map failures onto exit codes without parsing
/// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when adaptive quadrature exhausts its subdivision budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double best_estimate, double error_estimate);

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace heavytail
