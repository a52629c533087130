#pragma once

#include <stdexcept>
#include <string>

namespace qcm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (bad grid, bad flag, violated precondition).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Mathematical domain violation (probability outside (0,1), nonpositive variance, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Regression design matrix is numerically rank deficient.
class SingularDesignError : public Error {
public:
    using Error::Error;
};

/// |beta1| too small for the moment mapping; skewness/kurtosis undefined.
class DegenerateScaleError : public Error {
public:
    using Error::Error;
};

/// Parameter vector produces an invalid recursion (e.g. negative radicand).
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// An optimizer or estimation routine failed to produce a usable result.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Too few surviving quantile paths to run the moment regression.
class InsufficientPoolError : public Error {
public:
    using Error::Error;
};

} // namespace qcm
