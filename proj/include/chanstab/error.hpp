#pragma once

#include <stdexcept>
#include <string>

namespace chanstab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (bad grid, wrong p, non-zero mean, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to meet its stopping criterion.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The time step exceeds the advective CFL bound.
class CflError : public Error {
 public:
  CflError(const std::string& what, double courant) : Error(what), courant_(courant) {}
  double courant() const { return courant_; }

 private:
  double courant_;
};

}  // namespace chanstab
