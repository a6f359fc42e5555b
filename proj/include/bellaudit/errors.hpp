#pragma once

#include <stdexcept>
#include <string>

namespace bellaudit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: broken invariants, bad files, inconsistent configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (|beta| >= 1, n < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Enumeration or search instance larger than the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// A construction whose precondition does not hold for the given data.
class NotApplicable : public Error {
 public:
  using Error::Error;
};

// A postselected correlator cell with zero kept weight.
class EmptyCell : public Error {
 public:
  using Error::Error;
};

}  // namespace bellaudit
