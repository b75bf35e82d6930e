#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sqlsim {

// Error taxonomy mirrors the CLI exit codes: config (2), numerical (3), io (4).
// The code string is machine-parsable, e.g. "NonPositive(mass)" or "NoConvergence".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqlsim
