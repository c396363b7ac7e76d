#pragma once

#include <stdexcept>
#include <string>

namespace red {

/// Broad failure category; the CLI maps each one to a distinct exit status.
enum class ErrorKind {
    invalid_argument,  ///< caller broke a precondition
    parse,             ///< malformed input text
    numerical,         ///< rank deficiency, non-convergence, no bracket
    domain,            ///< query outside the region a model is defined on
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::string column = {})
        : Error(ErrorKind::parse, decorate(what, row, column)), row_(row), column_(std::move(column)) {}

    /// 1-based line number in the source (header is line 1); 0 when not row-specific.
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    static std::string decorate(const std::string& what, std::size_t row, const std::string& column) {
        std::string out;
        if (row != 0) out += "line " + std::to_string(row) + ": ";
        if (!column.empty()) out += "column '" + column + "': ";
        return out + what;
    }

    std::size_t row_;
    std::string column_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class RankDeficient : public NumericalError {
public:
    explicit RankDeficient(const std::string& what) : NumericalError(what) {}
};

class NoSignChange : public NumericalError {
public:
    explicit NoSignChange(const std::string& what) : NumericalError(what) {}
};

class ConvergenceFailure : public NumericalError {
public:
    explicit ConvergenceFailure(const std::string& what) : NumericalError(what) {}
};

class NonMonotone : public NumericalError {
public:
    explicit NonMonotone(const std::string& what) : NumericalError(what) {}
};

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(const std::string& what) : Error(ErrorKind::domain, what) {}
};

}  // namespace red
