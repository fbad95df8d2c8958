#pragma once

#include <stdexcept>
#include <string>

namespace pigflow {

/// Base class for all toolkit errors. Stages catch this at the CLI
/// boundary and turn it into a one-line diagnostic.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input file could not be parsed. Carries the offending line number
/// (1-based, 0 when not line-specific).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace pigflow
