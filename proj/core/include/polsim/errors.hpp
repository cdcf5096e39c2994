#pragma once

#include <stdexcept>
#include <string>

namespace polsim {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text: bad JSON, missing schema fields, unparseable numbers.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a documented invariant. The message names
/// the violated invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace polsim
