#pragma once

#include <stdexcept>
#include <string>

namespace qus {

// Every failure raised by the toolkit derives from qus::Error so callers
// (notably the CLI) can map categories onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain (r <= 0 for a log-density, x <= 0 for gamma).
class DomainError : public Error {
public:
    using Error::Error;
};

// A window whose samples cannot support an estimate (zero variance, equal samples).
class DegenerateWindow : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class UnsupportedVersion : public FormatError {
public:
    using FormatError::FormatError;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Input data that is missing, inconsistent or unusable (absent artifacts,
// mismatched shapes between related files).
class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class TrainingFailure : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace qus
