#pragma once

#include <stdexcept>
#include <string>

namespace thermowave {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class BoundsError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class SelectionError : public Error { using Error::Error; };

// Raised for invalid caller-supplied parameters. The CLI reports these as
// usage errors.
class ConfigError : public Error { using Error::Error; };
class CatalogError : public ConfigError { using ConfigError::ConfigError; };
class LevelError : public ConfigError { using ConfigError::ConfigError; };

}  // namespace thermowave
