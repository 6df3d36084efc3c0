#pragma once

#include <stdexcept>
#include <string>

namespace surveylm {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed questionnaire, config, table, or fixture input.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Permanent backend failure: exhausted retries, unusable response,
/// or a fixture miss in replay-only mode.
class BackendError : public Error {
public:
    using Error::Error;
};

}  // namespace surveylm
