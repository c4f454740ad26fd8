#pragma once

#include <stdexcept>
#include <string>

namespace kqlearn {

/// Caller supplied malformed arguments (dimension mismatch, out-of-range parameter, ...).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A factorization or variance computation left its numerically valid range.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation requires state the object does not hold (e.g. predict without observations).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Synthetic MDP could not be built with the requested parameters.
class ConstructionError : public std::runtime_error {
public:
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kqlearn
