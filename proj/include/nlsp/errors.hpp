#pragma once

#include <stdexcept>
#include <string>

namespace nlsp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A pointwise function was evaluated outside its domain (e.g. log of zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The right-hand side of a singular linear system has a component along the
/// kernel of the adjoint, so no solution exists.
class SolvabilityError : public Error {
 public:
  using Error::Error;
};

/// A driven block system is singular because the driving frequency coincides
/// with a mode frequency.
class ResonanceError : public Error {
 public:
  ResonanceError(const std::string& what, double frequency)
      : Error(what), frequency_(frequency) {}
  double frequency() const { return frequency_; }

 private:
  double frequency_;
};

/// Dynamical instability: complex mode frequency or blow-up during evolution.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Two independent routes to the same quantity disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlsp
