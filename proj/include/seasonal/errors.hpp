#pragma once

#include <stdexcept>
#include <string>

namespace seasonal {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite entries, out-of-range arguments, dimension mismatches.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A matrix lacks the sign or connectivity pattern an algorithm needs.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// An iteration ran out of budget. Carries the last residual it saw.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// A constrained linear solve is singular beyond the expected rank-one defect.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// The monotonicity certificate required for bisection failed.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Closed-form diagonalization is undefined for the given parameters.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the divergence bound.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Scenario file problems: malformed JSON, bad keys, bad values.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A command was invoked without a field it requires.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace seasonal
