#pragma once

#include <stdexcept>
#include <string>

namespace ascout {

/// Base of every error raised by the library. Callers that only care about
/// "something failed" catch this; the subclasses name the failure mode.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A state component left the finite range during integration.
class NonFinite : public Error {
 public:
  using Error::Error;
};

/// The noisy training trajectory hopped to another basin of attraction.
class BasinEscape : public Error {
 public:
  using Error::Error;
};

/// The raw reservoir matrix had no eigenvalue with a usable positive real part.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class ZeroNormalizer : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration / input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ascout
