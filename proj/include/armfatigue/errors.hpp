#pragma once

#include <stdexcept>
#include <string>

namespace armfatigue {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Kinematics
class UnreachableTarget : public Error {
 public:
  using Error::Error;
};
class TimeOutOfRange : public Error {
 public:
  using Error::Error;
};
class SingularTrajectory : public Error {
 public:
  using Error::Error;
};

// Dynamics
class OutOfRangeAnthropometry : public Error {
 public:
  using Error::Error;
};

// Fatigue
class NegativeTime : public Error {
 public:
  using Error::Error;
};
class ZeroCapacity : public Error {
 public:
  using Error::Error;
};

/// Problems with user-provided scenario or grid files. The CLI maps these to
/// exit code 1, everything else to 2.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError : public InputError {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : InputError(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ValidationError : public InputError {
 public:
  ValidationError(const std::string& path, const std::string& what)
      : InputError(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace armfatigue
