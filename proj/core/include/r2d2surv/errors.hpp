#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace r2d2surv {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- data validation -------------------------------------------------------

class DataError : public Error {
public:
    using Error::Error;
};

class DegenerateColumn : public DataError {
public:
    explicit DegenerateColumn(std::size_t column)
        : DataError("covariate column " + std::to_string(column) +
                    " has zero standard deviation over uncensored rows"),
          column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class TooFewEvents : public DataError {
public:
    explicit TooFewEvents(std::size_t events)
        : DataError("need at least 2 uncensored observations, found " + std::to_string(events)) {}
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

// CSV ingestion failure; line is 1-based (0 when not tied to a line).
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// ---- numerics --------------------------------------------------------------

class NonFiniteResult : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class OutOfSupport : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

class EmptyRegion : public Error {
public:
    using Error::Error;
};

// ---- sampling --------------------------------------------------------------

class ChainError : public Error {
public:
    using Error::Error;
};

class InfeasibleRegion : public ChainError {
public:
    using ChainError::ChainError;
};

class ChainDiverged : public ChainError {
public:
    using ChainError::ChainError;
};

// ---- metrics ---------------------------------------------------------------

class OneClassOnly : public Error {
public:
    OneClassOnly() : Error("selection AUC needs both zero and nonzero truth classes") {}
};

class NoComparablePairs : public Error {
public:
    NoComparablePairs() : Error("no comparable pairs for the concordance index") {}
};

}  // namespace r2d2surv
