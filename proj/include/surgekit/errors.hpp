#pragma once

#include <stdexcept>
#include <string>

namespace surgekit {

// Root of every error the library throws. The CLI maps subclasses onto
// distinct exit codes (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside an operation's precondition (non-finite value, bad range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The Greitzer model is undefined for the given state (psi <= 0).
class ModelBreakdownError : public Error {
 public:
  using Error::Error;
};

class NoEquilibriumError : public Error {
 public:
  using Error::Error;
};

// A scan or root search could not produce the requested quantity.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

class DegenerateResponseError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Scenario parse/validation failure. `key` names the offending setting when
// known, `line` is the 1-based source line (0 when not from a file).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string key = {}, int line = 0)
      : Error(message), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace surgekit
