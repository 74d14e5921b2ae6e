#pragma once

#include <stdexcept>
#include <string>

namespace cover {

// Inputs that are well-formed but outside a formula's domain (t <= 0,
// singular correlation, irrational observed price, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// File access and parse failures. Parse failures carry a 1-based position.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : IoError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace cover
