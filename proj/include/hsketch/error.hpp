#pragma once

#include <stdexcept>
#include <string>

namespace hsketch {

/// Violated precondition of a library call (bad shape, out-of-range argument).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but numerically degenerate (zero diagonal, zero norm).
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or truncated persisted data.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solver failed to reach its residual target.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace hsketch
