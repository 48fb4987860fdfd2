#pragma once

#include <stdexcept>
#include <string>

namespace cutvip {

/// Bad arguments: dimension mismatch, out-of-range parameters, non-finite input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An oracle broke its documented contract (e.g. zero subgradient where f > 0).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A C-delta selection failed the ball-clearance test.
class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An oracle returned NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or inconsistent configuration of a check or run.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inner iterative solve hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace cutvip
