#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace poolsim {

/// Argument outside an operation's mathematical domain (negative power,
/// D <= 0 fed to the subsidy shape, vacuous tail bound, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment configuration. `field()` is a JSON pointer to the
/// offending entry, e.g. "/miners/1/capacity".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)), message_(what) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

  /// Same error with `prefix` prepended to the field path.
  ConfigError nested(const std::string& prefix) const { return {prefix + field_, message_}; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace poolsim
