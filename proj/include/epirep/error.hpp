#pragma once

#include <stdexcept>
#include <string>

namespace epirep {

/// A caller passed a value outside an operation's domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejected configuration text or values. `key` and `line` locate the
/// offending entry when known (line 0 = not from a document).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

/// A simulation invariant broke. Carries the engine phase that detected it.
class InvariantViolation : public std::logic_error {
 public:
  InvariantViolation(std::string phase, const std::string& what)
      : std::logic_error("[" + phase + "] " + what), phase_(std::move(phase)) {}

  const std::string& phase() const noexcept { return phase_; }

 private:
  std::string phase_;
};

}  // namespace epirep
