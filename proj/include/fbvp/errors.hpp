#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fbvp {

enum class ErrorKind {
    integration_failure,
    no_crossing,
    degenerate_interpolation,
    invalid_lambda,
    tolerance_not_met,
    not_in_class,
    domain,
    order_saturation,
    config,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::integration_failure: return "integration_failure";
    case ErrorKind::no_crossing: return "no_crossing";
    case ErrorKind::degenerate_interpolation: return "degenerate_interpolation";
    case ErrorKind::invalid_lambda: return "invalid_lambda";
    case ErrorKind::tolerance_not_met: return "tolerance_not_met";
    case ErrorKind::not_in_class: return "not_in_class";
    case ErrorKind::domain: return "domain";
    case ErrorKind::order_saturation: return "order_saturation";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

/// Base exception for every failure raised by the library.
///
/// `location` carries the abscissa (or swept parameter) where the failure
/// was detected when one is meaningful; `step_index` the integration step.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what,
          std::optional<double> location = std::nullopt,
          std::optional<long> step_index = std::nullopt)
        : std::runtime_error(what), kind_(kind), location_(location), step_index_(step_index) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<double> location() const noexcept { return location_; }
    std::optional<long> step_index() const noexcept { return step_index_; }

private:
    ErrorKind kind_;
    std::optional<double> location_;
    std::optional<long> step_index_;
};

} // namespace fbvp
