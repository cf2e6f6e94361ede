#ifndef PCURL_ERROR_HPP_
#define PCURL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pcurl {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values (bad law parameters, zero budgets, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed caller input (unknown token id, acc outside [0,1], ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on an object in the wrong state (e.g. unscored group).
class StateError : public Error {
 public:
  using Error::Error;
};

// Non-finite intermediate value. The message names the offending group/token.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Text that fails to parse. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcurl

#endif  // PCURL_ERROR_HPP_
