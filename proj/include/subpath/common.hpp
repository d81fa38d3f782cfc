#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace subpath {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Argument / precondition violations. Alias rather than subclass so call
// sites can keep throwing the standard type with a decent message.
using ArgumentError = std::invalid_argument;

// An iterative numeric routine failed to reach its accuracy target.
// Carries the residual estimate at the point it gave up.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual estimate " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A weighted-space operation hit a point where the survival weight is zero
// (or has to be treated as zero), so the weight power is meaningless.
class DegenerateWeightError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace subpath
