#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wedge_rbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
public:
    DomainError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// The wedge / reflection configuration cannot support the requested operation.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// A non-finite value appeared while stepping a path.
class NumericalError : public Error {
public:
    NumericalError(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A statistical estimator cannot be evaluated on the given sample.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Input exceeds a hard size limit (exhaustive oracles).
class SizeError : public Error {
public:
    using Error::Error;
};

/// A caller-side precondition does not hold on the data.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A p-variation exponent outside the supported range.
class UnsupportedExponentError : public Error {
public:
    using Error::Error;
};

/// An excursion carries zero p-variation, so the time change is undefined on it.
class DegenerateExcursionError : public Error {
public:
    DegenerateExcursionError(std::size_t index, const std::string& what)
        : Error("excursion " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Configuration file could not be parsed or validated.
class ConfigError : public Error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace wedge_rbm
