#pragma once

#include <stdexcept>
#include <string>

namespace hompol {

// Invalid argument to a model function (non-finite angle, bad probability, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Not enough single/coincidence events to form an estimate.
class InsufficientCounts : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Cramér–Rao bound requested at a point with zero Fisher information.
class DegenerateBound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable or unwritable file, or a file that does not parse.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace detail
}  // namespace hompol
