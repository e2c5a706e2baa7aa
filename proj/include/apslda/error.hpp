#pragma once

#include <stdexcept>
#include <string>

namespace apslda {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, out-of-range arguments.
class ArgError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the offending line number in the message.
class ParseError : public ArgError {
 public:
  using ArgError::ArgError;
};

// Retry exhaustion, unreachable peers, simulation deadlock.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace apslda
