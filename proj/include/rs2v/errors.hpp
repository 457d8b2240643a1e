// Error types shared across the rs2v library.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rs2v {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix failed the orthonormality / determinant check.
class NotARotation : public Error {
 public:
  using Error::Error;
};

/// Spherical conversion requested for a point at (or too close to) the origin.
class DegenerateOrigin : public Error {
 public:
  using Error::Error;
};

/// Underlying file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Binary point file length is not a whole number of records.
class TruncatedRecord : public Error {
 public:
  using Error::Error;
};

/// Operation applied to a cloud or annotation in the wrong coordinate frame.
class WrongFrame : public Error {
 public:
  using Error::Error;
};

/// Structured-text input could not be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Requested target object id is not present in the labels.
class UnknownTarget : public Error {
 public:
  using Error::Error;
};

/// Target object id appears more than once in the labels.
class DuplicateTarget : public Error {
 public:
  using Error::Error;
};

/// Sidecar segmentation label count does not match the cloud point count.
class LabelLengthMismatch : public Error {
 public:
  using Error::Error;
};

/// Too few or rank-deficient points for a plane fit.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Segmenter received an empty cloud while configured strict.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

/// Invalid job, sensor, or segmenter configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rs2v
