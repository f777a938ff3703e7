#pragma once

#include <stdexcept>
#include <string>

namespace skewgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, non-finite values, broken invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown during an otherwise valid computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, long failing_minor)
      : NumericalError(what), failing_minor_(failing_minor) {}

  /// 1-based order of the first leading minor that is not positive.
  long failing_minor() const { return failing_minor_; }

 private:
  long failing_minor_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewgp
