#pragma once

#include <stdexcept>
#include <string>

namespace flr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An infinite series required by a rate quantity does not converge.
class TailDivergenceError : public Error {
public:
    using Error::Error;
};

/// The k* search window does not contain the maximizer.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Rate-catalog side condition violated; the message names the inequality.
class SideConditionError : public Error {
public:
    using Error::Error;
};

/// Configuration document failed validation. `path()` is the dotted key path.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace flr
