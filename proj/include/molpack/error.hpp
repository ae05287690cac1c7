#pragma once

#include <stdexcept>
#include <string>

namespace molpack {

// Base class for all recoverable molpack failures.  Callers that want to
// distinguish failure modes catch one of the subclasses below; callers that
// only want "did it work" catch Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual or binary input (bad XYZ frame, bad JSON, bad CSV, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// An item does not fit into the container it was assigned to.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// An index refers outside the addressed container.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// A keyed lookup found nothing.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Stored bytes fail their checksum or structural validation.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Two pieces of data that must agree do not (mismatched sizes, multisets, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Matrix/vector operands have incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// No execution plan satisfies the hardware constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Problem instance exceeds a hard size limit of the algorithm asked to solve it.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace molpack
