#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corrkit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A value fails a domain-type invariant (NaN at a valid pixel, non-orthonormal R, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed binary payload. Carries the byte offset where decoding stopped.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Malformed text payload. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A metric is undefined for its inputs (no overlapping valid pixels, empty match set).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Robust model fitting could not produce an estimate.
class EstimationError : public Error {
public:
    using Error::Error;
};

} // namespace corrkit
