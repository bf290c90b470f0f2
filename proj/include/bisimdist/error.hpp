#pragma once

#include <stdexcept>
#include <string>

namespace bisimdist {

/// Malformed or invalid input (maps to CLI exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric procedure hit its iteration cap (CLI exit code 2).
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A checked algorithmic invariant failed (CLI exit code 3).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bisimdist
