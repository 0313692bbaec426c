#pragma once
#include <stdexcept>
#include <string>

namespace cpsvm {

/// Invalid argument or precondition violation on a domain object.
class DomainError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
          line_(line)
    {}
    explicit ParseError(const std::string& what)
        : std::runtime_error(what), line_(0)
    {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// The simplex basis could not be factorized, even after repair.
class FactorizationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw DomainError(msg);
}

} // namespace detail
} // namespace cpsvm
