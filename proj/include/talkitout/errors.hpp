#pragma once

#include <stdexcept>
#include <string>

namespace talkitout {

// All library errors derive from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidIndexError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct IllegalTransitionError : Error {
  using Error::Error;
};

struct LayoutError : Error {
  using Error::Error;
};

struct ActionError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

}  // namespace talkitout
