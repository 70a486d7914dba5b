#pragma once

#include <stdexcept>
#include <string>

namespace microcavity {

/// Precondition or input-validation failure. Carries the name of the module
/// that rejected the input so front ends can report where it originated.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string module, const std::string& what)
      : std::invalid_argument(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// An iterative solver ran out of iterations without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char* module, const std::string& message) {
  if (!ok) throw ValidationError(module, message);
}

}  // namespace detail
}  // namespace microcavity
