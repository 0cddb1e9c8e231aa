#pragma once

#include <stdexcept>
#include <string>

namespace thermolab {

/// Base for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, out-of-range values, violated preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

/// A command that the session state machine refuses in its current state.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Bundle content does not match its manifest.
class IntegrityError : public InputError {
public:
    using InputError::InputError;
};

// Process exit codes shared by the CLI entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitProtocolError = 3;

} // namespace thermolab
