#pragma once

#include <stdexcept>
#include <string>

namespace distkp {

/// Caller passed arguments that violate a precondition (dimension mismatch, empty set, bad range).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization failed or produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Communication graph was disconnected while the abort policy was active.
class ConnectivityError : public std::runtime_error {
 public:
  ConnectivityError(long step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace distkp
