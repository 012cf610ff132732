#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jacexp {

/// A caller violated an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request exceeds what the current sieve, table, or exhaustive threshold covers.
class CapacityError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Parameters lie outside the range where a formula or criterion applies.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Characteristic 2 or 3.
class UnsupportedFieldError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A group structure could not be certified; never replaced by a guess.
class UncertifiedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two routes that must agree did not (e.g. the oracle and a curve scan).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Required upstream data (survey records) is missing.
class DependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CacheError : public std::runtime_error {
 public:
  CacheError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace jacexp
