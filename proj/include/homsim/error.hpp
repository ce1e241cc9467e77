#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homsim
{

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition or type invariant.
class PreconditionError : public Error
{
public:
    using Error::Error;
};

/// Scenario text could not be turned into a valid scenario.
class ParseError : public Error
{
public:
    ParseError(std::size_t line, std::string key, const std::string& message)
        : Error(format(line, key, message)), line_(line), key_(std::move(key))
    {
    }

    /// 1-based line number, 0 when the problem is not tied to a line.
    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    static std::string format(std::size_t line, const std::string& key, const std::string& message)
    {
        std::string out;
        if (line > 0)
            out += "line " + std::to_string(line) + ": ";
        if (!key.empty())
            out += "'" + key + "': ";
        return out + message;
    }

    std::size_t line_;
    std::string key_;
};

/// Maximum-likelihood fit did not converge.
class FitError : public Error
{
public:
    using Error::Error;
};

}  // namespace homsim
