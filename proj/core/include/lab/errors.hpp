#pragma once

#include <stdexcept>
#include <string>

namespace lab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition of an operation was violated by the caller (shape, length, bounds).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Invalid user-facing configuration; `field` names the offending setting when known.
class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& message, std::string field = {})
        : Error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A persisted document failed schema or invariant validation.
class LoadError : public Error {
public:
    LoadError(std::string field, const std::string& message)
        : Error("load error at '" + field + "': " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DecisionError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace lab
