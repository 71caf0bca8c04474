#pragma once

#include <stdexcept>
#include <string>

namespace pretex {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input file contents. Carries the offending line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& file, size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : Error(what) {}
    size_t line() const { return line_; }

private:
    size_t line_ = 0;
};

// Invalid or unresolvable run configuration (also covers demo-pool underflow).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Prototype pool incomplete or malformed for a requested (relation, key).
class PoolError : public Error {
public:
    using Error::Error;
};

// Sample generation failed for a triplet (e.g. a generation service
// returned an unusable reply).
class GenerationError : public Error {
public:
    using Error::Error;
};

// Evaluation stage failure that is not a transport problem.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// HTTP transport failure after the retry budget is exhausted.
class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace pretex
