#pragma once

#include <stdexcept>
#include <string>

namespace polyex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model or request document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Layer chain or signature shape does not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or inverted input box.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point, objective or matrix has the wrong number of coordinates.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Class index out of range, or the factual class passed as a counterfactual.
class InvalidClassError : public Error {
 public:
  using Error::Error;
};

/// The counterfactual class asked for is the class the network already chose.
class FactualClassError : public InvalidClassError {
 public:
  using InvalidClassError::InvalidClassError;
};

/// Hard caps guarding exponential procedures (vertex enumeration, oracle).
class CapExceededError : public Error {
 public:
  using Error::Error;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its admissible range (e.g. Hamming distance).
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyex
