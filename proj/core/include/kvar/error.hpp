#pragma once

#include <stdexcept>
#include <string>

namespace kvar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A distribution or algorithm parameter is outside its domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Two inputs disagree in size or dimension.
class ShapeError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// Rows of an input file have inconsistent field counts.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t row) : Error(what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// A field could not be parsed as a number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// The requested evaluator does not exist for this measure family.
class UnsupportedFamilyError : public Error {
public:
    using Error::Error;
};

class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double probability)
        : Error(what), probability_(probability) {}
    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

class DivergentIntegralError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace kvar
