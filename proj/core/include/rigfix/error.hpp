#pragma once

#include <stdexcept>
#include <string>

namespace rigfix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidIntrinsicsError : public Error {
 public:
  using Error::Error;
};

/// A point projects onto or behind the image plane of a camera.
class BehindCameraError : public Error {
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

/// Patch or window falls outside an image.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class TooFewMatchesError : public Error {
 public:
  using Error::Error;
};

/// The constraint system does not determine every requested parameter.
class DegenerateGeometryError : public Error {
 public:
  DegenerateGeometryError(const std::string& what, std::string direction)
      : Error(what), direction_(std::move(direction)) {}

  /// Name of the parameter that dominates the unidentifiable direction.
  const std::string& direction() const noexcept { return direction_; }

 private:
  std::string direction_;
};

}  // namespace rigfix
