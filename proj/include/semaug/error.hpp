#pragma once

#include <stdexcept>
#include <string>

namespace semaug {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON line, config value).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Binary file does not match its declared layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (k > n, N < 3, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf met where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace semaug
