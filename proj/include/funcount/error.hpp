#pragma once

#include <stdexcept>
#include <string>

namespace funcount {

/// Base class for every error raised by the library. Messages are prefixed
/// with the module that raised them, e.g. "ingest: duplicate subject_id 'A'".
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& message);

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Malformed input: wrong lengths, unparseable files, unknown levels.
class InputError : public Error {
public:
    using Error::Error;
};

/// Values outside their allowed domain (nonpositive weights, bad K, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition (empty input, single class, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace funcount
