#pragma once

#include <stdexcept>
#include <string>

namespace cace {

/// Invalid or inconsistent input data (bad CSV, non-binary indicators, tiny arms).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A least-squares design without full column rank. `column()` names the
/// first column found to be linearly dependent on the others.
class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& what, std::string column)
        : std::runtime_error(what), column_(std::move(column)) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// HC2/HC3 weights are undefined when a unit has leverage 1.
class DegenerateLeverageError : public std::runtime_error {
public:
    DegenerateLeverageError(const std::string& what, std::size_t unit)
        : std::runtime_error(what), unit_(unit) {}

    std::size_t unit() const noexcept { return unit_; }

private:
    std::size_t unit_;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace cace
