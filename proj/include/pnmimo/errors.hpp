#pragma once

#include <stdexcept>
#include <string>

namespace pnmimo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidOrder : public Error {
public:
    using Error::Error;
};

class InvalidSpacing : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

class SpaceTooLarge : public Error {
public:
    using Error::Error;
};

class DimensionTooLarge : public Error {
public:
    using Error::Error;
};

class UnsupportedModel : public Error {
public:
    using Error::Error;
};

/// A factorization or solve failed where the math says it cannot.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration. Carries the offending field and, when
/// parsed from a file, the line number (0 when not applicable).
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what, int line = 0)
        : Error(format(field, what, line)), field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, const std::string& what, int line) {
        std::string msg = line > 0 ? "line " + std::to_string(line) + ": " : std::string{};
        if (!field.empty()) msg += "'" + field + "': ";
        return msg + what;
    }

    std::string field_;
    int line_;
};

} // namespace pnmimo
