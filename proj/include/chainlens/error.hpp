#pragma once

#include <stdexcept>
#include <string>

namespace chainlens {

// Base of every error the library raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaViolation : public Error {
public:
    using Error::Error;
};

class UnknownEntity : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SplitInfeasible : public Error {
public:
    using Error::Error;
};

class EmptyQuerySet : public Error {
public:
    using Error::Error;
};

class VocabularyMismatch : public Error {
public:
    using Error::Error;
};

class DegenerateGraph : public Error {
public:
    using Error::Error;
};

// A criticality report that does not describe the graph it is applied to.
class ReportMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace chainlens
