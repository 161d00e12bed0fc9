#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regula
{
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Syntax or resolution failure while reading a fact file or plan file.
    /// Line and column are 1-based; 0 means "not tied to a position".
    class ParseError : public Error
    {
    public:
        ParseError(const std::string & message, std::size_t line, std::size_t column);

        [[nodiscard]] auto line() const noexcept -> std::size_t { return _line; }
        [[nodiscard]] auto column() const noexcept -> std::size_t { return _column; }
        [[nodiscard]] auto message() const -> const std::string & { return _message; }

    private:
        std::string _message;
        std::size_t _line;
        std::size_t _column;
    };

    /// Evaluation failure: unresolved name, flat operator applied to a family,
    /// missing function value.
    class EvalError : public Error
    {
    public:
        using Error::Error;
    };

    /// A request that violates its preconditions (bad horizon, unknown module in an assumption, ...).
    class RequestError : public Error
    {
    public:
        using Error::Error;
    };
}
