#pragma once

#include <stdexcept>
#include <string>

namespace causalq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files (unreadable, ragged, duplicate columns).
class InputError : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

}  // namespace causalq
