#pragma once

#include <stdexcept>
#include <string>

namespace anisoflow {

/// Argument outside the domain where an operation is defined
/// (zero vector, non-generic direction of a non-smooth density, t <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent run configuration (unknown key, CFL violation, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN/Inf or overshoot detected during a computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed AMCF1 grid file.
class FormatError : public std::runtime_error {
public:
    enum class Kind { BadMagic, BadVersion, BadHeader, Truncated, Io };

    FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace anisoflow
