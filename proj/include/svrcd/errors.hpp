#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svrcd {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class CyclicGraph : public Error
{
public:
    CyclicGraph() : Error("graph contains a directed cycle") {}
};

class InfeasibleEdgeCount : public Error
{
public:
    InfeasibleEdgeCount(std::size_t requested, std::size_t available)
        : Error("cannot place " + std::to_string(requested) + " edges, only " +
                std::to_string(available) + " admissible pairs")
    {}
};

class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NodeOutOfRange : public Error
{
public:
    using Error::Error;
};

class LevelOutOfRange : public Error
{
public:
    using Error::Error;
};

class ShapeMismatch : public Error
{
public:
    using Error::Error;
};

/// Raised when an optimizer step produces inf/nan, usually a step size that is too large.
class NonFiniteUpdate : public Error
{
public:
    NonFiniteUpdate(std::ptrdiff_t child, std::ptrdiff_t parent)
        : Error("non-finite coefficient in block (" + std::to_string(child) + ", " +
                std::to_string(parent) + "); reduce the learning rate")
    {}
};

class NodeCountMismatch : public Error
{
public:
    using Error::Error;
};

class EmptyInput : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace svrcd
