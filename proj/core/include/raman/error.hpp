#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raman {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed caller input: shape mismatch, out-of-range parameter, degenerate data.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Linear system could not be factorized.
class SingularSystem : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    /// 1-based line number, 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Binary container (dataset cache, model file) failed validation.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace raman
