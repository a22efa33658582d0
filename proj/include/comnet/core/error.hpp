#pragma once

#include <stdexcept>
#include <string>

namespace comnet {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes (see ExitCode in tools/).
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// A caller handed over data that violates a documented precondition
// (non-finite samples, mismatched shapes, out-of-range parameters).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

// Non-finite values in otherwise well-formed input arrays.
class InvalidInput : public InvalidArgument
{
public:
  using InvalidArgument::InvalidArgument;
};

// Overflow or NaN produced inside a computation.
class NumericFailure : public Error
{
public:
  using Error::Error;
};

class MissingCalibration : public Error
{
public:
  using Error::Error;
};

class CalibrationFailure : public Error
{
public:
  using Error::Error;
};

class IllConditionedCalibration : public CalibrationFailure
{
public:
  using CalibrationFailure::CalibrationFailure;
};

class InternalError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

class BadMagic : public IoError
{
public:
  using IoError::IoError;
};

class VersionMismatch : public IoError
{
public:
  using IoError::IoError;
};

class TruncatedFile : public IoError
{
public:
  using IoError::IoError;
};

// Header parsed but describes a shape/dtype/layout that is unusable or does
// not match the payload.
class MalformedHeader : public IoError
{
public:
  using IoError::IoError;
};

} // namespace comnet
