#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (d <= 0, xi <= 0, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// The operation is not defined for the given model variant.
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

/// Input data is well formed but violates an invariant.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

  private:
    int line_;
};

/// A numerical procedure produced a non-finite value or an inconsistent result.
class NumericsError : public Error {
  public:
    using Error::Error;
};

}  // namespace casimir
