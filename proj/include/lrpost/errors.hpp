#pragma once

#include <stdexcept>
#include <string>

namespace lrpost {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong shapes, non-finite entries, out-of-range ranks.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A covariance that should be symmetric positive definite is not.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Two Gaussian measures are (numerically) mutually singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A divergence formula was evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An operator maps outside the range it is required to map into.
class RangeError : public Error {
 public:
  using Error::Error;
};

class NumericalIntegrationError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed beyond its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrpost
