#pragma once

#include <stdexcept>
#include <string>

namespace a653 {

/// Base of every error the model raises for misuse of an operation (as
/// opposed to the RETURN_CODE values services hand back).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public ModelError {
public:
    ConfigError(std::string location, const std::string& what)
        : ModelError(location.empty() ? what : location + ": " + what), location_(std::move(location)) {}
    [[nodiscard]] const std::string& location() const { return location_; }

private:
    std::string location_;
};

class IllegalModeTransition : public ModelError {
public:
    using ModelError::ModelError;
};

class IllegalStateTransition : public ModelError {
public:
    using ModelError::ModelError;
};

class InvalidModeError : public ModelError {
public:
    using ModelError::ModelError;
};

class DuplicateIdError : public ModelError {
public:
    using ModelError::ModelError;
};

class AlreadyExistsError : public ModelError {
public:
    using ModelError::ModelError;
};

class ModuleDownError : public ModelError {
public:
    ModuleDownError() : ModelError("module is shut down") {}
};

class UnconfiguredError : public ModelError {
public:
    using ModelError::ModelError;
};

class UnknownServiceError : public ModelError {
public:
    using ModelError::ModelError;
};

}  // namespace a653
