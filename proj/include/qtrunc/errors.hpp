#pragma once

#include <stdexcept>
#include <string>

namespace qtrunc {

/** Malformed input: an element of the wrong shape, mismatched groups, unknown labels. */
class StructuralError : public std::runtime_error
{
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/** An operation was called outside its documented domain. */
class PreconditionError : public std::runtime_error
{
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/** A configured budget (ball size, iteration cap) was exceeded. */
class ResourceError : public std::runtime_error
{
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/** An optimization or iterative method did not reach a usable answer. */
class ConvergenceError : public std::runtime_error
{
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/** Configuration or schema validation failure (CLI layer). */
class ValidationError : public std::runtime_error
{
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qtrunc
