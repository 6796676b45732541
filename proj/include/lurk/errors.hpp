#pragma once

#include <stdexcept>
#include <string>

namespace lurk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or dimension bases do not agree.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// The qoi dimensions are not in the column space of the exposed dimension
/// matrix. This is itself an (analytic) lurking-variable signal.
class NotHomogeneous : public Error {
public:
  using Error::Error;
};

/// The pinned variables span every base dimension; no detection is possible.
class FullRankPinned : public Error {
public:
  using Error::Error;
};

class SingularCovariance : public Error {
public:
  using Error::Error;
};

class TooFewSamples : public Error {
public:
  using Error::Error;
};

/// An iterative kernel hit its iteration cap.
class NoConvergence : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace lurk
