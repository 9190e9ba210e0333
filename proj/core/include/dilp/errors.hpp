#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dilp {

/// Input outside an operation's domain (bad shape, out-of-range value, unknown name).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// API misuse, e.g. replaying a consumed forward trace.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A NaN or Inf appeared where the math guarantees finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `position` is a 0-based character offset for rule
/// text and a 1-based line number for line-oriented files.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace dilp
