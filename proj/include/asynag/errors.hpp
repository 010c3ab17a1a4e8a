#pragma once

#include <stdexcept>
#include <string>

namespace asynag {

/// Invalid configuration detected at construction time (infeasible sets,
/// unknown topology kinds, nonpositive timing bounds, bad config keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (dimension mismatch, infeasible
/// starting point).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A runtime invariant of the algorithm failed (weight underflow, division by
/// a nonpositive push-sum weight, staleness beyond the augmented depth).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its iteration cap.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace asynag
