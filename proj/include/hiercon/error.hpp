// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hiercon {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A value outside its domain (theta not in (0,1), duplicate port, bad solver knob).
class DomainError : public Error {
  public:
    using Error::Error;
};

class NoChainFound : public Error {
  public:
    using Error::Error;
};

class AmbiguousChain : public Error {
  public:
    using Error::Error;
};

class CycleDetected : public Error {
  public:
    using Error::Error;
};

class UnknownMember : public Error {
  public:
    using Error::Error;
};

class DuplicateId : public Error {
  public:
    using Error::Error;
};

/// The threshold-sum constraint cannot be met even with every threshold at its lower bound.
class Infeasible : public Error {
  public:
    using Error::Error;
};

// Parse errors carry a location: "line:column" for syntax, a JSON pointer otherwise.
class ParseError : public Error {
  public:
    ParseError(const std::string &location, const std::string &what)
        : Error(location + ": " + what), location_(location) {}
    const std::string &location() const noexcept { return location_; }

  private:
    std::string location_;
};

class SyntaxError : public ParseError {
  public:
    using ParseError::ParseError;
};

class SchemaError : public ParseError {
  public:
    using ParseError::ParseError;
};

class SemanticError : public ParseError {
  public:
    using ParseError::ParseError;
};

} // namespace hiercon
