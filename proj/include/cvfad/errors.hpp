#pragma once

#include <stdexcept>
#include <string>

namespace cvfad {

// Base for every error raised by the toolkit. Catch this at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation landed exactly on a pole of the transfer function.
class PoleHit : public Error {
 public:
  using Error::Error;
};

// A frequency at or above the Nyquist limit of a discrete system was requested.
class NyquistExceeded : public Error {
 public:
  using Error::Error;
};

// Two operands live in different domains or at different sample times.
class DomainMismatch : public Error {
 public:
  using Error::Error;
};

// An operation only defined for one domain was called on the other.
class WrongDomain : public Error {
 public:
  using Error::Error;
};

class NonCausal : public Error {
 public:
  using Error::Error;
};

class NoFeasibleM : public Error {
 public:
  using Error::Error;
};

class AlgebraicLoop : public Error {
 public:
  using Error::Error;
};

class NotInitialized : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class WindowTooShort : public Error {
 public:
  using Error::Error;
};

}  // namespace cvfad
