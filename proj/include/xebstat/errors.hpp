#pragma once

#include <stdexcept>
#include <string>

namespace xebstat {

/// Bad user input: malformed specs, out-of-range parameters, unknown keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, residual bound violated, degenerate fit.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Request for functionality that is deliberately not implemented
/// (e.g. two-copy dynamics of a non-unital channel).
class OutOfScopeError : public std::runtime_error {
 public:
  explicit OutOfScopeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xebstat
