#include "heavytail/error.hpp"

namespace heavytail {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kInfiniteMean: return "infinite-mean";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kBracket: return "bracket";
    case ErrorKind::kOptimization: return "optimization";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kDegenerateData: return "degenerate-data";
    case ErrorKind::kFitFailure: return "fit-failure";
    case ErrorKind::kExtrapolationDomain: return "extrapolation-domain";
    case ErrorKind::kSubThreshold: return "sub-threshold";
    case ErrorKind::kFileNotFound: return "file-not-found";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ConvergenceError::ConvergenceError(const std::string& message, double best_estimate,
                                   double error_estimate)
    : Error(ErrorKind::kConvergence, message),
      best_estimate_(best_estimate),
      error_estimate_(error_estimate) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace heavytail
