#ifndef DUALCAST_ERRORS_HPP
#define DUALCAST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dualcast {

// Instance violates the well-posedness bounds (sum of lower bounds must not
// exceed capacity, capacity must not exceed sum of upper bounds).
class InfeasibleInstanceError : public std::runtime_error {
 public:
  explicit InfeasibleInstanceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Operation asked of a model or instance that does not support it
// (non-smooth model, too many users for exhaustive search, non-log users
// in a log-only check).
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what)
      : std::runtime_error(what) {}
};

// A certificate was requested for a run that does not satisfy the
// certificate's preconditions. The message names the failed precondition.
class InapplicableError : public std::runtime_error {
 public:
  explicit InapplicableError(const std::string& what)
      : std::runtime_error(what) {}
};

// Experiment config text could not be parsed; carries the offending line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace dualcast

#endif  // DUALCAST_ERRORS_HPP
