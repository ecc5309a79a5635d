#pragma once

#include <stdexcept>
#include <string>

namespace progjoin {

// Malformed relation file; the message carries the 1-based row number.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Partition address outside [0, partition count).
class AddressError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Argument outside a function's mathematical domain (n = 0, a > b, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent configuration, e.g. a string predicate over integer-only tuples.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The exact join-size oracle was asked to enumerate more pairs than allowed.
class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace progjoin
