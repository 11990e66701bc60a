#pragma once

#include <stdexcept>
#include <string>

namespace gck {

// Every failure surfaced by the library derives from Error. The CLI maps the
// three families (config, data, runtime) onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters or configuration supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

class ParameterError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Malformed, inconsistent or unusable input data.
class DataError : public Error {
public:
    using Error::Error;
};

class IndexError : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class EmptyInputError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateInputError : public DataError {
public:
    using DataError::DataError;
};

class CorruptionError : public DataError {
public:
    using DataError::DataError;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Failures while computing.
class RuntimeError : public Error {
public:
    using Error::Error;
};

// A caller broke an operation's precondition on a mutable structure.
class ContractError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class TimeoutError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

class DivergenceError : public RuntimeError {
public:
    using RuntimeError::RuntimeError;
};

// Wraps a failure with the pipeline stage it came from. Keeps the original
// family so exit-code mapping still works.
template <class Base>
class StageError : public Base {
public:
    StageError(std::string stage, const std::string& what)
        : Base("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace gck
