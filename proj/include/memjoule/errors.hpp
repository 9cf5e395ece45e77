#pragma once

#include <stdexcept>
#include <string>

namespace memjoule {

// Failure classes map one-to-one onto CLI exit codes, so scripted callers
// can tell a malformed input from a numerically hopeless one.
enum class ErrorKind {
  InvalidModel,        // non-finite or otherwise unusable coefficients
  InsufficientData,    // too few samples for the requested computation
  DegenerateDesign,    // rank-deficient / ill-conditioned design matrix
  ZeroVariance,        // all sample energies identical, R^2 undefined
  InvalidDenominator,  // division by a non-positive quantity
  Coverage,            // interval not covered by a trace
  Domain,              // value outside its documented range (e.g. beta)
  Parse,               // malformed input file
  Io,                  // file open/read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::DegenerateDesign: return "degenerate-design";
    case ErrorKind::ZeroVariance: return "zero-variance";
    case ErrorKind::InvalidDenominator: return "invalid-denominator";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace memjoule
