#pragma once

#include <stdexcept>
#include <string>

namespace apollo {

/// Vector/matrix dimensions do not line up (assignment vs. instance, etc.).
class DimensionError : public std::runtime_error {
public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

/// A variable is being fixed to a value that conflicts with an earlier fix.
class ConflictError : public std::runtime_error {
public:
  explicit ConflictError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed text input. Carries 1-based line/column of the offending token.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

/// Invalid parameters or configuration values.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A backend refused the request outright (e.g. too many variables to enumerate).
class RefusalError : public std::runtime_error {
public:
  explicit RefusalError(const std::string& what) : std::runtime_error(what) {}
};

/// A backend produced output that fails validation (infeasible incumbent, ...).
class IntegrityError : public std::runtime_error {
public:
  explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apollo
