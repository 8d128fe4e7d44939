#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pinembed {

/// Input outside an operation's domain (bad probability, dimension mismatch,
/// precondition violation). Maps to CLI exit code 2.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or incomplete configuration (missing desk-mode overrides,
/// malformed norm descriptor). Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation refused to start because its estimated size exceeds a cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// A mathematical invariant failed at runtime (e.g. N' > N).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pinembed
