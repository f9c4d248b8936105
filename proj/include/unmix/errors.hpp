#pragma once

#include <stdexcept>
#include <string>

namespace unmix {

// Error taxonomy. Each class maps to a distinct CLI exit code so scripts can
// tell configuration mistakes apart from bad files, shape mismatches, and
// numerical breakdowns.
enum class ErrorClass {
  config = 2,     // unparseable config, unknown keys, invalid parameter values
  io = 3,         // unreadable/unwritable files, malformed file content
  dimension = 4,  // conformability violations between otherwise valid inputs
  numerical = 5,  // non-finite intermediates, degenerate inputs
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }
  int exit_code() const noexcept { return static_cast<int>(cls_); }

 private:
  ErrorClass cls_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::io, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorClass::dimension, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, long iteration = -1)
      : Error(ErrorClass::numerical, what), iteration_(iteration) {}
  // Iteration at which the failure surfaced; -1 when not applicable.
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace unmix
