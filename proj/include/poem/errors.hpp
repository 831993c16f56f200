#pragma once

#include <stdexcept>
#include <string>

namespace poem {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid study description: bad config file, impossible ladder, unusable
/// parameters. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure while evaluating a study numerically. Maps to CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

class NonIntegerSegments : public ConfigError {
public:
    NonIntegerSegments(const std::string& msg, int level) : ConfigError(msg), level(level) {}
    int level;  // first offending refinement level (1-based)
};

class NonIntegerSteps : public ConfigError {
public:
    NonIntegerSteps(const std::string& msg, int level) : ConfigError(msg), level(level) {}
    int level;
};

class UnstableParameters : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateOrders : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class SingularSystem : public NumericError {
public:
    using NumericError::NumericError;
};

class MismatchedSupport : public NumericError {
public:
    using NumericError::NumericError;
};

class EmptyField : public NumericError {
public:
    using NumericError::NumericError;
};

class NonPositiveValue : public NumericError {
public:
    using NumericError::NumericError;
};

class ZeroLeadingTerm : public NumericError {
public:
    using NumericError::NumericError;
};

class InsufficientWindows : public NumericError {
public:
    using NumericError::NumericError;
};

class UndefinedOrder : public NumericError {
public:
    using NumericError::NumericError;
};

class MismatchedLadder : public NumericError {
public:
    using NumericError::NumericError;
};

class NonBracketing : public NumericError {
public:
    using NumericError::NumericError;
};

class InsufficientNeighbors : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace poem
